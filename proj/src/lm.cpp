#include "lectern/lm.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <sstream>

#include <cereal/archives/portable_binary.hpp>
#include <cereal/types/set.hpp>
#include <cereal/types/string.hpp>
#include <cereal/types/vector.hpp>

#include "lectern/error.hpp"
#include "lectern/io.hpp"

namespace lectern {

std::vector<Document> load_corpus(const std::string& path) {
  namespace fs = std::filesystem;
  std::vector<Document> docs;
  if (fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(path)) {
      if (entry.is_regular_file()) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) docs.push_back({f.filename().string(), io::read_file(f.string())});
    return docs;
  }
  io::for_each_line(io::read_file(path), [&](std::size_t line_no, std::string_view line) {
    if (line.empty()) return;
    auto tab = line.find('\t');
    if (tab == std::string_view::npos || tab == 0) throw ParseError(line_no, "expected doc_id<TAB>body");
    std::string body;
    auto rest = line.substr(tab + 1);
    for (std::size_t i = 0; i < rest.size(); ++i) {
      if (rest[i] == '\\' && i + 1 < rest.size() && rest[i + 1] == 'n') {
        body += '\n';
        ++i;
      } else {
        body += rest[i];
      }
    }
    docs.push_back({std::string(line.substr(0, tab)), std::move(body)});
  });
  return docs;
}

std::vector<RankedDocument> rank_documents(std::span<const Document> general, std::string_view textbook,
                                           const ScoringParams& params, const TokenizerConfig& tokenizer) {
  if (general.empty()) return {};
  std::vector<Passage> passages(general.size());
  for (std::size_t i = 0; i < general.size(); ++i) {
    auto& p = passages[i];
    p.passage_id = static_cast<std::uint32_t>(i);
    p.first_unit = static_cast<std::uint32_t>(i);
    p.width = 1;
    p.term_counts = count_terms(general[i].body, tokenizer);
    for (const auto& [term, count] : p.term_counts) p.dl += count;
  }
  const auto index = build_index(passages, params, tokenizer);
  const auto scores = score_all(index, make_query(textbook, tokenizer));
  std::vector<RankedDocument> ranked(general.size());
  for (std::size_t i = 0; i < ranked.size(); ++i) ranked[i] = {i, scores[i]};
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const RankedDocument& a, const RankedDocument& b) { return a.score > b.score; });
  return ranked;
}

std::vector<Document> select_corpus(std::span<const Document> general, std::string_view textbook, std::size_t k,
                                    const ScoringParams& params, const TokenizerConfig& tokenizer) {
  if (k == 0) throw ValidationError("selection size must be at least 1");
  auto ranked = rank_documents(general, textbook, params, tokenizer);
  if (ranked.size() > k) ranked.resize(k);
  std::vector<Document> out;
  out.reserve(ranked.size());
  for (const auto& r : ranked) out.push_back(general[r.position]);
  return out;
}

Vocabulary::Vocabulary(std::vector<std::string> terms) : terms_(std::move(terms)) {
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (terms_[i] == kUnknownSymbol || terms_[i] == "<s>" || terms_[i] == "</s>") {
      throw ValidationError("reserved symbol in vocabulary: " + terms_[i]);
    }
    if (!ids_.emplace(terms_[i], static_cast<WordId>(kFirstTermId + i)).second) {
      throw ValidationError("duplicate vocabulary term: " + terms_[i]);
    }
  }
}

bool Vocabulary::contains(std::string_view term) const { return ids_.contains(std::string(term)); }

WordId Vocabulary::id(std::string_view term) const {
  auto it = ids_.find(std::string(term));
  return it == ids_.end() ? kUnknown : it->second;
}

Vocabulary build_vocab(std::span<const Document> corpus, std::size_t cap, const TokenizerConfig& tokenizer) {
  if (cap == 0) throw ValidationError("vocabulary cap must be at least 1");
  std::map<std::string, std::uint64_t> counts;
  for (const auto& doc : corpus) {
    for (auto& term : tokenize(doc.body, tokenizer)) {
      if (term == kUnknownSymbol || term == "<s>" || term == "</s>") continue;
      ++counts[std::move(term)];
    }
  }
  std::vector<std::pair<std::string, std::uint64_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  if (ranked.size() > cap) ranked.resize(cap);
  std::vector<std::string> terms;
  terms.reserve(ranked.size());
  for (auto& [term, count] : ranked) terms.push_back(std::move(term));
  return Vocabulary(std::move(terms));
}

std::uint32_t TrigramModel::Context::count_of(WordId w) const {
  auto it = std::lower_bound(words.begin(), words.end(), w);
  if (it == words.end() || *it != w) return 0;
  return counts[static_cast<std::size_t>(it - words.begin())];
}

double TrigramModel::unigram_prob(WordId w) const {
  const double events = static_cast<double>(vocab_.event_count());
  const double types = static_cast<double>(unigram_types_);
  const double c = w < unigram_counts_.size() ? static_cast<double>(unigram_counts_[w]) : 0.0;
  return (c + types / events) / (static_cast<double>(unigram_total_) + types);
}

namespace {

template <class Lower>
double backoff_prob(const TrigramModel::Context& ctx, WordId w, Lower&& lower) {
  const auto c = ctx.count_of(w);
  if (c > 0) {
    const double denom = ctx.maximum_likelihood ? static_cast<double>(ctx.total)
                                                : static_cast<double>(ctx.total + ctx.types());
    return static_cast<double>(c) / denom;
  }
  return ctx.alpha * lower(w);
}

template <class Lower>
void fit_context(TrigramModel::Context& ctx, std::size_t event_count, Lower&& lower) {
  ctx.total = 0;
  for (auto c : ctx.counts) ctx.total += c;
  ctx.maximum_likelihood = ctx.types() >= event_count;
  ctx.alpha = 0.0;
  if (ctx.maximum_likelihood) return;
  double seen = 0.0;
  for (auto w : ctx.words) seen += lower(w);
  double unseen = 1.0 - seen;
  if (!(unseen > 0.0)) {
    // Cancellation left nothing; sum the unseen events directly.
    unseen = 0.0;
    for (WordId w = kSentenceEnd; w < kFirstTermId + event_count - 2; ++w) {
      if (ctx.count_of(w) == 0) unseen += lower(w);
    }
  }
  const double t = static_cast<double>(ctx.types());
  ctx.alpha = (t / (static_cast<double>(ctx.total) + t)) / unseen;
}

}  // namespace

double TrigramModel::bigram_prob(WordId w, WordId h1) const {
  const auto* ctx = bigram_context(h1);
  if (!ctx) return unigram_prob(w);
  return backoff_prob(*ctx, w, [&](WordId x) { return unigram_prob(x); });
}

double TrigramModel::prob(WordId w, WordId h2, WordId h1) const {
  const auto* ctx = trigram_context(h2, h1);
  if (!ctx) return bigram_prob(w, h1);
  return backoff_prob(*ctx, w, [&](WordId x) { return bigram_prob(x, h1); });
}

const TrigramModel::Context* TrigramModel::bigram_context(WordId h1) const {
  auto it = bigrams_.find(h1);
  return it == bigrams_.end() ? nullptr : &it->second;
}

const TrigramModel::Context* TrigramModel::trigram_context(WordId h2, WordId h1) const {
  auto it = trigrams_.find(key(h2, h1));
  return it == trigrams_.end() ? nullptr : &it->second;
}

std::vector<std::pair<WordId, WordId>> TrigramModel::trigram_histories() const {
  std::vector<std::pair<WordId, WordId>> out;
  out.reserve(trigrams_.size());
  for (const auto& [k, ctx] : trigrams_) out.emplace_back(static_cast<WordId>(k >> 32), static_cast<WordId>(k));
  std::sort(out.begin(), out.end());
  return out;
}

void TrigramModel::finalize() {
  unigram_total_ = 0;
  unigram_types_ = 0;
  for (WordId w = kSentenceEnd; w < unigram_counts_.size(); ++w) {
    unigram_total_ += unigram_counts_[w];
    if (unigram_counts_[w] > 0) ++unigram_types_;
  }
  const auto events = vocab_.event_count();
  for (auto& [h1, ctx] : bigrams_) fit_context(ctx, events, [&](WordId w) { return unigram_prob(w); });
  for (auto& [k, ctx] : trigrams_) {
    const auto h1 = static_cast<WordId>(k);
    fit_context(ctx, events, [&](WordId w) { return bigram_prob(w, h1); });
  }
}

namespace {

using FollowerCounts = std::map<WordId, std::uint32_t>;

TrigramModel::Context to_context(const FollowerCounts& followers) {
  TrigramModel::Context ctx;
  for (const auto& [w, c] : followers) {
    ctx.words.push_back(w);
    ctx.counts.push_back(c);
  }
  return ctx;
}

}  // namespace

TrigramModel train_trigram(std::span<const Document> corpus, const Vocabulary& vocab,
                           const TokenizerConfig& tokenizer) {
  TrigramModel model;
  model.vocab_ = vocab;
  model.tokenizer_ = tokenizer;
  model.unigram_counts_.assign(kFirstTermId + vocab.size(), 0);
  std::map<WordId, FollowerCounts> bigrams;
  std::map<std::uint64_t, FollowerCounts> trigrams;
  std::vector<WordId> seq;
  for (const auto& doc : corpus) {
    io::for_each_line(doc.body, [&](std::size_t, std::string_view line) {
      auto terms = tokenize(line, tokenizer);
      if (terms.empty()) return;
      seq.assign({kSentenceStart, kSentenceStart});
      for (const auto& t : terms) seq.push_back(vocab.id(t));
      seq.push_back(kSentenceEnd);
      for (std::size_t i = 2; i < seq.size(); ++i) {
        ++model.unigram_counts_[seq[i]];
        ++bigrams[seq[i - 1]][seq[i]];
        ++trigrams[TrigramModel::key(seq[i - 2], seq[i - 1])][seq[i]];
      }
    });
  }
  if (trigrams.empty()) throw ValidationError("training corpus has no tokens");
  for (const auto& [h1, f] : bigrams) model.bigrams_.emplace(h1, to_context(f));
  for (const auto& [k, f] : trigrams) model.trigrams_.emplace(k, to_context(f));
  model.finalize();
  return model;
}

double oov_rate(const Vocabulary& vocab, std::span<const std::string> test_tokens) {
  if (test_tokens.empty()) throw ValidationError("empty test set");
  std::size_t missing = 0;
  for (const auto& t : test_tokens) {
    if (!vocab.contains(t)) ++missing;
  }
  return static_cast<double>(missing) / static_cast<double>(test_tokens.size());
}

PerplexityResult evaluate_perplexity(const LanguageModel& model, std::span<const std::string> test_tokens) {
  if (test_tokens.empty()) throw ValidationError("empty test set");
  const auto& vocab = model.vocabulary();
  long double sum = 0.0L;
  PerplexityResult result;
  WordId h2 = kSentenceStart;
  WordId h1 = kSentenceStart;
  for (const auto& token : test_tokens) {
    const WordId w = vocab.id(token);
    if (w == kUnknown) ++result.unknown;
    const long double lp = model.log_prob(w, h2, h1);
    if (!std::isfinite(lp)) throw ValidationError("zero probability for token '" + token + "'");
    sum += lp;
    ++result.scored;
    h2 = h1;
    h1 = w;
  }
  result.log_prob_sum = static_cast<double>(sum);
  result.perplexity = static_cast<double>(std::exp(-sum / static_cast<long double>(result.scored)));
  return result;
}

namespace {

constexpr std::string_view kModelMagic = "LCTNLM3";

struct ContextRecord {
  std::uint64_t key = 0;
  std::vector<WordId> words;
  std::vector<std::uint32_t> counts;

  template <class Archive>
  void serialize(Archive& ar) {
    ar(key, words, counts);
  }
};

template <class Map>
std::vector<ContextRecord> records_of(const Map& contexts) {
  std::vector<ContextRecord> out;
  out.reserve(contexts.size());
  for (const auto& [k, ctx] : contexts) out.push_back({static_cast<std::uint64_t>(k), ctx.words, ctx.counts});
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.key < b.key; });
  return out;
}

}  // namespace

std::string serialize_model(const TrigramModel& model) {
  std::ostringstream payload;
  {
    cereal::PortableBinaryOutputArchive ar(payload);
    std::vector<std::string> terms(model.vocab_.terms().begin(), model.vocab_.terms().end());
    ar(model.tokenizer_.lowercase, model.tokenizer_.stopwords, static_cast<std::uint8_t>(model.tokenizer_.mode));
    ar(terms, model.unigram_counts_, records_of(model.bigrams_), records_of(model.trigrams_));
  }
  return io::wrap_container(kModelMagic, kModelFormatVersion, payload.str());
}

TrigramModel deserialize_model(std::string_view bytes) {
  const auto payload = io::unwrap_container(bytes, kModelMagic, kModelFormatVersion);
  TrigramModel model;
  try {
    std::istringstream in(payload);
    cereal::PortableBinaryInputArchive ar(in);
    std::uint8_t mode = 0;
    std::vector<std::string> terms;
    std::vector<ContextRecord> bigrams;
    std::vector<ContextRecord> trigrams;
    ar(model.tokenizer_.lowercase, model.tokenizer_.stopwords, mode);
    ar(terms, model.unigram_counts_, bigrams, trigrams);
    if (mode > 1) throw FormatError("bad tokenizer mode");
    model.tokenizer_.mode = static_cast<TokenizerMode>(mode);
    model.vocab_ = Vocabulary(std::move(terms));
    if (model.unigram_counts_.size() != kFirstTermId + model.vocab_.size()) {
      throw FormatError("unigram table size mismatch");
    }
    const auto max_id = model.unigram_counts_.size();
    auto load = [&](ContextRecord& r) {
      if (r.words.size() != r.counts.size() || r.words.empty()) throw FormatError("bad context record");
      for (std::size_t i = 0; i < r.words.size(); ++i) {
        if (r.words[i] >= max_id || r.words[i] == kSentenceStart || (i > 0 && r.words[i] <= r.words[i - 1])) {
          throw FormatError("bad context record");
        }
      }
      TrigramModel::Context ctx;
      ctx.words = std::move(r.words);
      ctx.counts = std::move(r.counts);
      return ctx;
    };
    for (auto& r : bigrams) model.bigrams_.emplace(static_cast<WordId>(r.key), load(r));
    for (auto& r : trigrams) model.trigrams_.emplace(r.key, load(r));
  } catch (const cereal::Exception& e) {
    throw FormatError(std::string("corrupt model payload: ") + e.what());
  } catch (const ValidationError& e) {
    throw FormatError(std::string("corrupt model payload: ") + e.what());
  }
  model.finalize();
  return model;
}

void save_model(const TrigramModel& model, const std::string& path) { io::write_file(path, serialize_model(model)); }

TrigramModel load_model(const std::string& path) { return deserialize_model(io::read_file(path)); }

}  // namespace lectern
