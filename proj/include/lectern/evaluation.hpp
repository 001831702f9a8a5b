#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "lectern/index.hpp"
#include "lectern/lm.hpp"
#include "lectern/segmentation.hpp"

namespace lectern {

struct UnitRef {
  std::string lecture_id;
  std::uint32_t unit_id = 0;

  friend auto operator<=>(const UnitRef&, const UnitRef&) = default;
};

using UnitSet = std::set<UnitRef>;
using Qrels = std::map<std::string, UnitSet>;

struct EditCounts {
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;

  std::size_t total() const { return substitutions + deletions + insertions; }
};

/// Minimum unit-cost alignment of hyp against ref.
EditCounts align(std::span<const std::string> reference, std::span<const std::string> hypothesis);

/// (S + D + I) / |reference|. Throws ValidationError for an empty reference.
double word_error_rate(std::span<const std::string> reference, std::span<const std::string> hypothesis);

struct Rpf {
  double recall = 0.0;
  double precision = 0.0;
  double f = 0.0;
};

/// Harmonic mean; 0 when both are 0.
double f_measure(double recall, double precision);

/// Units covered by the groups, each counted once.
UnitSet expand_units(std::span<const PassageGroup> groups);

/// Throws ValidationError when `relevant` is empty.
Rpf recall_precision_f(std::span<const PassageGroup> retrieved, const UnitSet& relevant);

/// ".695" style: three decimals, leading zero dropped below 1.
std::string format_ratio(double value);
/// Three significant figures in fixed notation ("48.9", "122", "9.41").
std::string format_perplexity(double value);

struct TestCollection {
  /// lecture id -> variant name -> units
  std::map<std::string, std::map<std::string, std::vector<SpeechUnit>>> transcripts;
  /// lecture id -> paragraphs
  std::map<std::string, std::vector<std::string>> textbooks;
  std::map<std::string, std::string> queries;
  std::map<std::string, std::string> short_queries;
  Qrels qrels;

  /// Throws ValidationError when a qrels query has no text, a query spans
  /// several lectures, or a relevant unit is missing from the reference.
  void validate() const;
  /// Lecture of a query, from its qrels.
  const std::string& lecture_of(const std::string& query_id) const;
  std::vector<std::string> queries_for(const std::string& lecture_id) const;
};

inline constexpr std::string_view kReferenceVariant = "reference";

/// Layout: lectures/<id>/<variant>.tsv (unit format), lectures/<id>/textbook.txt
/// (one paragraph per line), queries.tsv, optional queries_short.tsv, qrels.tsv.
TestCollection load_collection(const std::string& dir);
void save_collection(const TestCollection& collection, const std::string& dir);

std::map<std::string, std::string> parse_queries(std::string_view content);
Qrels parse_qrels(std::string_view content);

struct Condition {
  std::string name;
  std::string variant;
  std::shared_ptr<const LanguageModel> lm;  // optional
};

/// Lines `name<TAB>variant[<TAB>model-path]`; '-' or a missing third field
/// means no language model. Relative model paths resolve against `base_dir`.
std::vector<Condition> parse_conditions(std::string_view content, const std::string& base_dir);

struct PipelineConfig {
  std::uint32_t n_max = kDefaultMaxWidth;
  std::size_t pool_size = kDefaultPoolSize;
  ScoringParams params;
  TokenizerConfig tokenizer;
};

struct RetrievalScores {
  std::size_t top_n = 0;
  std::size_t queries = 0;
  double recall = 0.0;     // mean over queries
  double precision = 0.0;  // mean over queries
  double f = 0.0;          // F of mean recall and mean precision
  double mean_f = 0.0;     // mean of per-query F
};

struct ConditionReport {
  std::string condition;
  std::string variant;
  std::optional<double> oov;
  std::optional<double> perplexity;
  std::optional<double> wer;
  std::vector<RetrievalScores> retrieval;  // one per requested top_n
};

struct LectureReport {
  std::string lecture_id;
  std::vector<ConditionReport> conditions;
};

struct EvalReport {
  std::vector<std::size_t> top_ns;
  std::vector<LectureReport> lectures;

  /// Lectures as column groups, conditions as columns; OOV, PP, WER rows then
  /// R, P, F per top_n.
  std::string format_table() const;
  nlohmann::json to_json() const;
};

enum class QuerySet { kParagraph, kKeyword };

/// Builds a per-lecture index over `units` and scores every query of the
/// lecture at each top_n.
std::vector<RetrievalScores> evaluate_lecture(const TestCollection& collection,
                                              const std::string& lecture_id,
                                              std::span<const SpeechUnit> units,
                                              std::span<const std::size_t> top_ns,
                                              const PipelineConfig& config,
                                              QuerySet query_set = QuerySet::kParagraph);

/// Reference token surfaces of a lecture variant, in order.
std::vector<std::string> transcript_tokens(std::span<const SpeechUnit> units);

/// Throws ValidationError listing absent variants.
EvalReport run_benchmark(const TestCollection& collection, std::span<const Condition> conditions,
                         std::span<const std::size_t> top_ns, const PipelineConfig& config = {});

}  // namespace lectern
