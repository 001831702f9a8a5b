#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lectern/segmentation.hpp"
#include "lectern/tokenizer.hpp"

namespace lectern {

enum class FormulaVariant {
  kPaper,     // K * ((1 - b) + dl / (b * avgdl))
  kStandard,  // K * ((1 - b) + b * dl / avgdl)
};

std::string_view to_string(FormulaVariant v);
FormulaVariant parse_formula_variant(std::string_view name);

struct ScoringParams {
  double k = 2.0;
  double b = 0.8;
  bool idf_clamp = false;
  FormulaVariant variant = FormulaVariant::kPaper;

  /// Throws ValidationError unless k > 0 and b in (0, 1].
  void validate() const;

  friend bool operator==(const ScoringParams&, const ScoringParams&) = default;
};

inline constexpr std::size_t kDefaultPoolSize = 50;

struct Query {
  std::string raw_text;
  std::map<std::string, std::uint32_t> term_counts;
};

Query make_query(std::string_view text, const TokenizerConfig& tokenizer);

struct ScoredPassage {
  std::uint32_t passage_id = 0;
  double score = 0.0;
  std::string lecture_id;
  std::uint32_t first_unit = 0;
  std::uint32_t end_unit = 0;  // exclusive
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;

  friend bool operator==(const ScoredPassage&, const ScoredPassage&) = default;
};

struct PassageGroup {
  std::vector<ScoredPassage> members;  // in input rank order
  std::string lecture_id;
  std::uint32_t first_unit = 0;
  std::uint32_t end_unit = 0;  // exclusive
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;
  double score = 0.0;  // mean of member scores

  friend bool operator==(const PassageGroup&, const PassageGroup&) = default;
};

/// Restricts a search to the named lectures; empty means no restriction.
using LectureFilter = std::set<std::string>;

class InvertedIndex {
 public:
  struct PassageInfo {
    std::uint32_t passage_id = 0;
    std::uint32_t lecture = 0;  // index into lectures()
    std::uint32_t first_unit = 0;
    std::uint32_t width = 0;
    std::int64_t start_ms = 0;
    std::int64_t end_ms = 0;
    std::uint32_t dl = 0;

    template <class Archive>
    void serialize(Archive& ar) {
      ar(passage_id, lecture, first_unit, width, start_ms, end_ms, dl);
    }
  };

  struct UnitInfo {
    std::uint32_t unit_id = 0;
    std::int64_t start_ms = 0;
    std::int64_t end_ms = 0;
    std::string text;

    template <class Archive>
    void serialize(Archive& ar) {
      ar(unit_id, start_ms, end_ms, text);
    }
  };

  /// Structure-of-arrays posting list, ordered by slot. `norm` caches the
  /// length-normalization term of each posting's passage.
  struct PostingList {
    std::vector<std::uint32_t> slots;
    std::vector<double> tf;
    std::vector<double> norm;
  };

  InvertedIndex() = default;

  /// Throws ValidationError on duplicate passage ids or invalid params.
  /// `units` supplies transcript snippets and may be empty.
  static InvertedIndex build(std::span<const Passage> passages, const ScoringParams& params,
                             const TokenizerConfig& tokenizer,
                             std::span<const SpeechUnit> units = {});

  std::size_t corpus_size() const { return passages_.size(); }
  double avgdl() const { return avgdl_; }
  const ScoringParams& params() const { return params_; }
  const TokenizerConfig& tokenizer() const { return tokenizer_; }
  std::span<const PassageInfo> passages() const { return passages_; }
  std::span<const std::string> lectures() const { return lectures_; }
  const std::string& lecture_name(std::uint32_t lecture) const { return lectures_.at(lecture); }
  std::optional<std::uint32_t> lecture_index(std::string_view name) const;

  /// Slot of a passage id in passages(); nullopt when unknown.
  std::optional<std::uint32_t> slot_of(std::uint32_t passage_id) const;
  const PostingList* postings(std::string_view term) const;
  std::uint32_t doc_freq(std::string_view term) const;
  std::size_t vocabulary_size() const { return postings_.size(); }
  /// Sorted list of indexed terms.
  std::vector<std::string> terms() const;

  /// ln((N - n_t + 0.5) / (n_t + 0.5)).
  double idf(std::uint32_t doc_freq) const;
  /// Length-normalization term of a slot.
  double norm(std::uint32_t slot) const { return norms_[slot]; }

  /// Units of a lecture in unit_id order (empty when built without units).
  std::span<const UnitInfo> units(std::uint32_t lecture) const;

  friend std::string serialize_index(const InvertedIndex& index);
  friend InvertedIndex deserialize_index(std::string_view bytes);

 private:
  void finalize();

  ScoringParams params_;
  TokenizerConfig tokenizer_;
  std::vector<std::string> lectures_;
  std::vector<PassageInfo> passages_;
  std::vector<std::vector<UnitInfo>> units_;
  std::unordered_map<std::string, PostingList> postings_;
  std::unordered_map<std::uint32_t, std::uint32_t> slot_by_id_;
  std::vector<double> norms_;
  double avgdl_ = 0.0;
};

inline InvertedIndex build_index(std::span<const Passage> passages, const ScoringParams& params,
                                 const TokenizerConfig& tokenizer = {},
                                 std::span<const SpeechUnit> units = {}) {
  return InvertedIndex::build(passages, params, tokenizer, units);
}

/// Relevance of one passage. Throws ValidationError for an unknown id.
double score_passage(const Query& query, std::uint32_t passage_id, const InvertedIndex& index);

/// Scores of every passage, indexed by slot.
std::vector<double> score_all(const InvertedIndex& index, const Query& query);

/// Passages with a nonzero score (positive when idf clamping is on), ordered
/// by score desc, start_ms asc, passage_id asc, truncated to pool_size.
std::vector<ScoredPassage> search(const InvertedIndex& index, const Query& query,
                                  std::size_t pool_size, const LectureFilter& filter = {});

/// Groups passages whose unit spans overlap (transitively, same lecture).
/// Group score is the mean of member scores; groups are ordered by score
/// desc, start_ms asc, lecture id asc.
std::vector<PassageGroup> merge_overlaps(std::span<const ScoredPassage> ranked);

std::vector<PassageGroup> query_top_n(const InvertedIndex& index, std::string_view query_text,
                                      std::size_t top_n, std::size_t pool_size = kDefaultPoolSize,
                                      const LectureFilter& filter = {});

inline constexpr std::uint32_t kIndexFormatVersion = 1;

std::string serialize_index(const InvertedIndex& index);
/// Throws FormatError for a damaged or version-mismatched container.
InvertedIndex deserialize_index(std::string_view bytes);
void save_index(const InvertedIndex& index, const std::string& path);
InvertedIndex load_index(const std::string& path);

}  // namespace lectern
