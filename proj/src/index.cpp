#include "lectern/index.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <cereal/archives/portable_binary.hpp>
#include <cereal/types/set.hpp>
#include <cereal/types/string.hpp>
#include <cereal/types/vector.hpp>

#include "lectern/error.hpp"
#include "lectern/io.hpp"
#include "lectern/simd/term_kernels.hpp"

namespace lectern {

std::string_view to_string(FormulaVariant v) { return v == FormulaVariant::kPaper ? "paper" : "standard"; }

FormulaVariant parse_formula_variant(std::string_view name) {
  if (name == "paper") return FormulaVariant::kPaper;
  if (name == "standard") return FormulaVariant::kStandard;
  throw ValidationError("unknown formula variant: " + std::string(name));
}

void ScoringParams::validate() const {
  if (!(k > 0.0)) throw ValidationError("K must be positive");
  if (!(b > 0.0 && b <= 1.0)) throw ValidationError("b must be in (0, 1]");
}

Query make_query(std::string_view text, const TokenizerConfig& tokenizer) {
  return Query{std::string(text), count_terms(text, tokenizer)};
}

InvertedIndex InvertedIndex::build(std::span<const Passage> passages, const ScoringParams& params,
                                   const TokenizerConfig& tokenizer, std::span<const SpeechUnit> units) {
  params.validate();
  InvertedIndex index;
  index.params_ = params;
  index.tokenizer_ = tokenizer;

  auto lecture_slot = [&](const std::string& name) -> std::uint32_t {
    auto it = std::find(index.lectures_.begin(), index.lectures_.end(), name);
    if (it != index.lectures_.end()) return static_cast<std::uint32_t>(it - index.lectures_.begin());
    index.lectures_.push_back(name);
    index.units_.emplace_back();
    return static_cast<std::uint32_t>(index.lectures_.size() - 1);
  };

  std::vector<const Passage*> ordered;
  ordered.reserve(passages.size());
  for (const auto& p : passages) ordered.push_back(&p);
  std::sort(ordered.begin(), ordered.end(),
            [](const Passage* a, const Passage* b) { return a->passage_id < b->passage_id; });
  for (std::size_t i = 1; i < ordered.size(); ++i) {
    if (ordered[i]->passage_id == ordered[i - 1]->passage_id) {
      throw ValidationError("duplicate passage id " + std::to_string(ordered[i]->passage_id));
    }
  }

  index.passages_.reserve(ordered.size());
  for (const auto* p : ordered) {
    const auto slot = static_cast<std::uint32_t>(index.passages_.size());
    index.passages_.push_back(
        {p->passage_id, lecture_slot(p->lecture_id), p->first_unit, p->width, p->start_ms, p->end_ms, p->dl});
    for (const auto& [term, count] : p->term_counts) {
      if (count == 0) continue;
      auto& list = index.postings_[term];
      list.slots.push_back(slot);
      list.tf.push_back(count);
    }
  }

  for (const auto& u : units) {
    auto& list = index.units_[lecture_slot(u.lecture_id)];
    list.push_back({u.unit_id, u.start_ms, u.end_ms, u.text()});
  }
  for (auto& list : index.units_) {
    std::sort(list.begin(), list.end(), [](const UnitInfo& a, const UnitInfo& b) { return a.unit_id < b.unit_id; });
  }

  double total = 0.0;
  for (const auto& p : index.passages_) total += p.dl;
  index.avgdl_ = index.passages_.empty() ? 0.0 : total / static_cast<double>(index.passages_.size());
  index.finalize();
  return index;
}

void InvertedIndex::finalize() {
  slot_by_id_.clear();
  for (std::uint32_t slot = 0; slot < passages_.size(); ++slot) slot_by_id_[passages_[slot].passage_id] = slot;

  std::vector<double> dl(passages_.size());
  for (std::size_t i = 0; i < dl.size(); ++i) dl[i] = passages_[i].dl;
  norms_.assign(dl.size(), params_.k * (1.0 - params_.b));
  if (avgdl_ > 0.0) {
    const auto& kernels = simd::active_kernels();
    auto fn = params_.variant == FormulaVariant::kPaper ? kernels.paper_norms : kernels.standard_norms;
    fn(dl, params_.k, params_.b, avgdl_, norms_);
  }
  for (auto& [term, list] : postings_) {
    list.norm.resize(list.slots.size());
    for (std::size_t i = 0; i < list.slots.size(); ++i) list.norm[i] = norms_[list.slots[i]];
  }
}

std::optional<std::uint32_t> InvertedIndex::lecture_index(std::string_view name) const {
  for (std::uint32_t i = 0; i < lectures_.size(); ++i) {
    if (lectures_[i] == name) return i;
  }
  return std::nullopt;
}

std::optional<std::uint32_t> InvertedIndex::slot_of(std::uint32_t passage_id) const {
  auto it = slot_by_id_.find(passage_id);
  if (it == slot_by_id_.end()) return std::nullopt;
  return it->second;
}

const InvertedIndex::PostingList* InvertedIndex::postings(std::string_view term) const {
  auto it = postings_.find(std::string(term));
  return it == postings_.end() ? nullptr : &it->second;
}

std::uint32_t InvertedIndex::doc_freq(std::string_view term) const {
  const auto* list = postings(term);
  return list ? static_cast<std::uint32_t>(list->slots.size()) : 0;
}

std::vector<std::string> InvertedIndex::terms() const {
  std::vector<std::string> out;
  out.reserve(postings_.size());
  for (const auto& [term, list] : postings_) out.push_back(term);
  std::sort(out.begin(), out.end());
  return out;
}

double InvertedIndex::idf(std::uint32_t doc_freq) const {
  const double n = static_cast<double>(passages_.size());
  const double nt = doc_freq;
  return std::log((n - nt + 0.5) / (nt + 0.5));
}

std::span<const InvertedIndex::UnitInfo> InvertedIndex::units(std::uint32_t lecture) const {
  if (lecture >= units_.size()) return {};
  return units_[lecture];
}

double score_passage(const Query& query, std::uint32_t passage_id, const InvertedIndex& index) {
  auto slot = index.slot_of(passage_id);
  if (!slot) throw ValidationError("unknown passage id " + std::to_string(passage_id));
  const auto& p = index.params();
  const double k1 = p.k + 1.0;
  const double norm = index.norm(*slot);
  double score = 0.0;
  for (const auto& [term, qtf] : query.term_counts) {
    const auto* list = index.postings(term);
    if (!list) continue;
    auto it = std::lower_bound(list->slots.begin(), list->slots.end(), *slot);
    if (it == list->slots.end() || *it != *slot) continue;
    const double idf = index.idf(static_cast<std::uint32_t>(list->slots.size()));
    if (p.idf_clamp && idf < 0.0) continue;
    const double tf = list->tf[static_cast<std::size_t>(it - list->slots.begin())];
    score += (static_cast<double>(qtf) * ((k1 * tf) / (norm + tf))) * idf;
  }
  return score;
}

std::vector<double> score_all(const InvertedIndex& index, const Query& query) {
  std::vector<double> scores(index.corpus_size(), 0.0);
  const auto& kernels = simd::active_kernels();
  const auto& p = index.params();
  std::vector<double> contrib;
  for (const auto& [term, qtf] : query.term_counts) {
    const auto* list = index.postings(term);
    if (!list) continue;
    const double idf = index.idf(static_cast<std::uint32_t>(list->slots.size()));
    if (p.idf_clamp && idf < 0.0) continue;
    contrib.resize(list->slots.size());
    kernels.term_contributions(list->tf, list->norm, p.k, static_cast<double>(qtf), idf, contrib);
    for (std::size_t i = 0; i < contrib.size(); ++i) scores[list->slots[i]] += contrib[i];
  }
  return scores;
}

std::vector<ScoredPassage> search(const InvertedIndex& index, const Query& query, std::size_t pool_size,
                                  const LectureFilter& filter) {
  if (pool_size == 0) throw ValidationError("pool_size must be at least 1");
  if (index.corpus_size() == 0 || query.term_counts.empty()) return {};
  const auto scores = score_all(index, query);
  const bool clamp = index.params().idf_clamp;
  const auto passages = index.passages();

  std::vector<bool> allowed;
  if (!filter.empty()) {
    allowed.resize(index.lectures().size());
    for (std::size_t i = 0; i < allowed.size(); ++i) allowed[i] = filter.contains(index.lectures()[i]);
  }

  std::vector<std::uint32_t> hits;
  for (std::uint32_t slot = 0; slot < scores.size(); ++slot) {
    const double s = scores[slot];
    if (clamp ? !(s > 0.0) : s == 0.0) continue;
    if (!allowed.empty() && !allowed[passages[slot].lecture]) continue;
    hits.push_back(slot);
  }
  auto before = [&](std::uint32_t a, std::uint32_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    if (passages[a].start_ms != passages[b].start_ms) return passages[a].start_ms < passages[b].start_ms;
    return passages[a].passage_id < passages[b].passage_id;
  };
  const auto keep = std::min(pool_size, hits.size());
  std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(keep), hits.end(), before);
  hits.resize(keep);

  std::vector<ScoredPassage> out;
  out.reserve(keep);
  for (auto slot : hits) {
    const auto& p = passages[slot];
    out.push_back({p.passage_id, scores[slot], index.lecture_name(p.lecture), p.first_unit,
                   p.first_unit + p.width, p.start_ms, p.end_ms});
  }
  return out;
}

std::vector<PassageGroup> merge_overlaps(std::span<const ScoredPassage> ranked) {
  const std::size_t n = ranked.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };

  // Sweep each lecture's spans in start order; a span joins the running
  // component while it starts before the component's furthest end.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (ranked[a].lecture_id != ranked[b].lecture_id) return ranked[a].lecture_id < ranked[b].lecture_id;
    return ranked[a].first_unit < ranked[b].first_unit;
  });
  for (std::size_t i = 0; i < n;) {
    std::size_t root = order[i];
    std::uint32_t reach = ranked[root].end_unit;
    std::size_t j = i + 1;
    while (j < n && ranked[order[j]].lecture_id == ranked[root].lecture_id &&
           ranked[order[j]].first_unit < reach) {
      parent[find(order[j])] = find(root);
      reach = std::max(reach, ranked[order[j]].end_unit);
      ++j;
    }
    i = j;
  }

  std::vector<PassageGroup> groups;
  std::vector<std::size_t> group_of_root(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto root = find(i);
    if (group_of_root[root] == n) {
      group_of_root[root] = groups.size();
      PassageGroup g;
      g.lecture_id = ranked[i].lecture_id;
      g.first_unit = ranked[i].first_unit;
      g.end_unit = ranked[i].end_unit;
      g.start_ms = ranked[i].start_ms;
      g.end_ms = ranked[i].end_ms;
      groups.push_back(std::move(g));
    }
    auto& g = groups[group_of_root[root]];
    g.members.push_back(ranked[i]);
    g.first_unit = std::min(g.first_unit, ranked[i].first_unit);
    g.end_unit = std::max(g.end_unit, ranked[i].end_unit);
    g.start_ms = std::min(g.start_ms, ranked[i].start_ms);
    g.end_ms = std::max(g.end_ms, ranked[i].end_ms);
  }
  for (auto& g : groups) {
    double sum = 0.0;
    for (const auto& m : g.members) sum += m.score;
    g.score = sum / static_cast<double>(g.members.size());
  }
  std::sort(groups.begin(), groups.end(), [](const PassageGroup& a, const PassageGroup& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.start_ms != b.start_ms) return a.start_ms < b.start_ms;
    if (a.lecture_id != b.lecture_id) return a.lecture_id < b.lecture_id;
    return a.first_unit < b.first_unit;
  });
  return groups;
}

std::vector<PassageGroup> query_top_n(const InvertedIndex& index, std::string_view query_text, std::size_t top_n,
                                      std::size_t pool_size, const LectureFilter& filter) {
  if (top_n == 0) throw ValidationError("top_n must be at least 1");
  const auto query = make_query(query_text, index.tokenizer());
  const auto ranked = search(index, query, pool_size, filter);
  auto groups = merge_overlaps(ranked);
  if (groups.size() > top_n) groups.resize(top_n);
  return groups;
}

namespace {

constexpr std::string_view kIndexMagic = "LCTNIDX";

struct PostingRecord {
  std::string term;
  std::vector<std::uint32_t> slots;
  std::vector<std::uint32_t> tf;

  template <class Archive>
  void serialize(Archive& ar) {
    ar(term, slots, tf);
  }
};

}  // namespace

std::string serialize_index(const InvertedIndex& index) {
  std::ostringstream payload;
  {
    cereal::PortableBinaryOutputArchive ar(payload);
    const auto& t = index.tokenizer_;
    const auto& p = index.params_;
    ar(t.lowercase, t.stopwords, static_cast<std::uint8_t>(t.mode));
    ar(p.k, p.b, p.idf_clamp, static_cast<std::uint8_t>(p.variant));
    ar(static_cast<std::uint64_t>(index.passages_.size()), index.avgdl_);
    ar(index.lectures_, index.passages_, index.units_);
    std::vector<PostingRecord> records;
    records.reserve(index.postings_.size());
    for (const auto& term : index.terms()) {
      const auto& list = index.postings_.at(term);
      PostingRecord r{term, list.slots, {}};
      r.tf.reserve(list.tf.size());
      for (double f : list.tf) r.tf.push_back(static_cast<std::uint32_t>(f));
      records.push_back(std::move(r));
    }
    ar(records);
  }
  return io::wrap_container(kIndexMagic, kIndexFormatVersion, payload.str());
}

InvertedIndex deserialize_index(std::string_view bytes) {
  const auto payload = io::unwrap_container(bytes, kIndexMagic, kIndexFormatVersion);
  InvertedIndex index;
  try {
    std::istringstream in(payload);
    cereal::PortableBinaryInputArchive ar(in);
    std::uint8_t mode = 0;
    std::uint8_t variant = 0;
    std::uint64_t n = 0;
    ar(index.tokenizer_.lowercase, index.tokenizer_.stopwords, mode);
    ar(index.params_.k, index.params_.b, index.params_.idf_clamp, variant);
    ar(n, index.avgdl_);
    ar(index.lectures_, index.passages_, index.units_);
    std::vector<PostingRecord> records;
    ar(records);
    if (mode > 1 || variant > 1) throw FormatError("bad enum value in index header");
    index.tokenizer_.mode = static_cast<TokenizerMode>(mode);
    index.params_.variant = static_cast<FormulaVariant>(variant);
    if (n != index.passages_.size()) throw FormatError("passage count mismatch");
    if (index.units_.size() != index.lectures_.size()) throw FormatError("unit table mismatch");
    for (const auto& p : index.passages_) {
      if (p.lecture >= index.lectures_.size()) throw FormatError("passage references unknown lecture");
    }
    for (auto& r : records) {
      if (r.slots.size() != r.tf.size()) throw FormatError("posting list length mismatch");
      InvertedIndex::PostingList list;
      for (auto s : r.slots) {
        if (s >= n) throw FormatError("posting references unknown passage");
      }
      list.slots = std::move(r.slots);
      list.tf.assign(r.tf.begin(), r.tf.end());
      index.postings_.emplace(std::move(r.term), std::move(list));
    }
    index.params_.validate();
  } catch (const cereal::Exception& e) {
    throw FormatError(std::string("corrupt index payload: ") + e.what());
  } catch (const ValidationError& e) {
    throw FormatError(std::string("corrupt index payload: ") + e.what());
  }
  index.finalize();
  return index;
}

void save_index(const InvertedIndex& index, const std::string& path) { io::write_file(path, serialize_index(index)); }

InvertedIndex load_index(const std::string& path) { return deserialize_index(io::read_file(path)); }

}  // namespace lectern
