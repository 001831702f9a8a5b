#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lectern/index.hpp"
#include "lectern/tokenizer.hpp"

namespace lectern {

struct Document {
  std::string doc_id;
  std::string body;  // one sentence per line

  friend bool operator==(const Document&, const Document&) = default;
};

/// A directory of text files (one document each, id = file name) or a single
/// file of `doc_id<TAB>body` lines. In the single-file form a literal "\n"
/// inside body separates sentences.
std::vector<Document> load_corpus(const std::string& path);

inline constexpr std::size_t kDefaultSelectionSize = 2000;
inline constexpr std::size_t kDefaultVocabularyCap = 20000;

struct RankedDocument {
  std::size_t position = 0;  // index into the general corpus
  double score = 0.0;
};

/// Ranks every document of `general` against the textbook, treating each
/// document as one passage. Ties break by corpus position.
std::vector<RankedDocument> rank_documents(std::span<const Document> general, std::string_view textbook,
                                           const ScoringParams& params, const TokenizerConfig& tokenizer);

/// Top-k of rank_documents.
std::vector<Document> select_corpus(std::span<const Document> general, std::string_view textbook,
                                    std::size_t k, const ScoringParams& params = {},
                                    const TokenizerConfig& tokenizer = {});

using WordId = std::uint32_t;

inline constexpr WordId kSentenceStart = 0;
inline constexpr WordId kSentenceEnd = 1;
inline constexpr WordId kUnknown = 2;
inline constexpr WordId kFirstTermId = 3;

inline constexpr std::string_view kUnknownSymbol = "<unk>";

/// Frequency-ranked term list. Ids: terms()[i] has id kFirstTermId + i.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> terms);

  std::span<const std::string> terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool contains(std::string_view term) const;
  /// kUnknown for out-of-vocabulary terms.
  WordId id(std::string_view term) const;
  /// Number of predictable events: terms plus <unk> and </s>.
  std::size_t event_count() const { return terms_.size() + 2; }
  WordId max_id() const { return static_cast<WordId>(kFirstTermId + terms_.size() - 1); }

 private:
  std::vector<std::string> terms_;
  std::unordered_map<std::string, WordId> ids_;
};

/// The `cap` most frequent terms, ties broken lexicographically ascending.
Vocabulary build_vocab(std::span<const Document> corpus, std::size_t cap,
                       const TokenizerConfig& tokenizer = {});

/// Conditional word model over the event space of a vocabulary.
class LanguageModel {
 public:
  virtual ~LanguageModel() = default;

  virtual const Vocabulary& vocabulary() const = 0;
  virtual const TokenizerConfig& tokenizer() const = 0;
  /// P(w | h2 h1) for an event id w (never kSentenceStart).
  virtual double prob(WordId w, WordId h2, WordId h1) const = 0;
  virtual long double log_prob(WordId w, WordId h2, WordId h1) const {
    return std::log(static_cast<long double>(prob(w, h2, h1)));
  }
};

/// Every event equally likely.
class UniformModel final : public LanguageModel {
 public:
  explicit UniformModel(Vocabulary vocab, TokenizerConfig tokenizer = {})
      : vocab_(std::move(vocab)), tokenizer_(std::move(tokenizer)) {}

  const Vocabulary& vocabulary() const override { return vocab_; }
  const TokenizerConfig& tokenizer() const override { return tokenizer_; }
  double prob(WordId, WordId, WordId) const override { return 1.0 / static_cast<double>(vocab_.event_count()); }
  long double log_prob(WordId, WordId, WordId) const override {
    return -std::log(static_cast<long double>(vocab_.event_count()));
  }

 private:
  Vocabulary vocab_;
  TokenizerConfig tokenizer_;
};

/// Witten-Bell backoff trigram model.
///
/// Unigram: p1(w) = (c(w) + T / E) / (C + T) over the E events, interpolated
/// with uniform so <unk> is never zero. Higher orders back off:
///   seen w:   p(w|h) = c(h,w) / (c(h) + T(h))
///   unseen w: p(w|h) = alpha(h) * p_lower(w)
/// with alpha(h) = (T(h) / (c(h) + T(h))) / (1 - sum_{seen} p_lower). A context
/// whose followers already cover all lower-order mass uses c(h,w) / c(h).
class TrigramModel final : public LanguageModel {
 public:
  struct Context {
    std::uint64_t total = 0;
    std::vector<WordId> words;  // sorted
    std::vector<std::uint32_t> counts;
    double alpha = 0.0;
    bool maximum_likelihood = false;

    std::uint32_t count_of(WordId w) const;
    std::size_t types() const { return words.size(); }
  };

  TrigramModel() = default;

  const Vocabulary& vocabulary() const override { return vocab_; }
  const TokenizerConfig& tokenizer() const override { return tokenizer_; }
  double prob(WordId w, WordId h2, WordId h1) const override;

  double unigram_prob(WordId w) const;
  double bigram_prob(WordId w, WordId h1) const;

  std::uint64_t unigram_count(WordId w) const { return unigram_counts_.at(w); }
  const Context* bigram_context(WordId h1) const;
  const Context* trigram_context(WordId h2, WordId h1) const;
  std::size_t bigram_context_count() const { return bigrams_.size(); }
  std::size_t trigram_context_count() const { return trigrams_.size(); }
  /// Trigram histories in sorted order.
  std::vector<std::pair<WordId, WordId>> trigram_histories() const;

  friend TrigramModel train_trigram(std::span<const Document> corpus, const Vocabulary& vocab,
                                    const TokenizerConfig& tokenizer);
  friend std::string serialize_model(const TrigramModel& model);
  friend TrigramModel deserialize_model(std::string_view bytes);

 private:
  static std::uint64_t key(WordId h2, WordId h1) { return (std::uint64_t{h2} << 32) | h1; }
  void finalize();

  Vocabulary vocab_;
  TokenizerConfig tokenizer_;
  std::vector<std::uint64_t> unigram_counts_;  // indexed by id; kSentenceStart stays 0
  std::uint64_t unigram_total_ = 0;
  std::uint64_t unigram_types_ = 0;
  std::unordered_map<WordId, Context> bigrams_;
  std::unordered_map<std::uint64_t, Context> trigrams_;
};

/// Each non-empty body line is a sentence padded as <s> <s> w1 .. wn </s>;
/// out-of-vocabulary terms count as <unk>. Throws ValidationError when the
/// corpus has no tokens.
TrigramModel train_trigram(std::span<const Document> corpus, const Vocabulary& vocab,
                           const TokenizerConfig& tokenizer = {});

/// Fraction of tokens not in the vocabulary. Throws ValidationError on empty input.
double oov_rate(const Vocabulary& vocab, std::span<const std::string> test_tokens);

struct PerplexityResult {
  double perplexity = 0.0;
  std::size_t scored = 0;  // includes <unk>-scored tokens
  std::size_t unknown = 0;
  double log_prob_sum = 0.0;
};

/// exp(-(1/n) sum ln p(w_i | w_{i-2} w_{i-1})) over a flat token list whose
/// history starts at <s> <s>. Out-of-vocabulary tokens are scored as <unk>
/// and counted in n.
PerplexityResult evaluate_perplexity(const LanguageModel& model, std::span<const std::string> test_tokens);

inline double perplexity(const LanguageModel& model, std::span<const std::string> test_tokens) {
  return evaluate_perplexity(model, test_tokens).perplexity;
}

inline constexpr std::uint32_t kModelFormatVersion = 1;

std::string serialize_model(const TrigramModel& model);
TrigramModel deserialize_model(std::string_view bytes);
void save_model(const TrigramModel& model, const std::string& path);
TrigramModel load_model(const std::string& path);

}  // namespace lectern
