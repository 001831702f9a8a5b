#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lectern/evaluation.hpp"
#include "lectern/segmentation.hpp"

namespace lectern {

struct NoiseSpec {
  double sub_rate = 0.0;
  double del_rate = 0.0;
  double ins_rate = 0.0;
  std::uint64_t seed = 0;
  std::vector<std::string> confusion_vocab;

  /// Throws ValidationError for negative rates, a sum above 1, or an empty
  /// confusion vocabulary when substitutions or insertions are requested.
  void validate() const;
};

/// Splits a target WER into rates with sub:del:ins = 2:1:1.
NoiseSpec noise_for_target(double target_wer, std::uint64_t seed, std::vector<std::string> confusion_vocab);

/// Per reference token: substitute (p = sub_rate, uniform over the confusion
/// vocabulary minus the original) or delete (p = del_rate). Insertions of a
/// random token go only where a kept token separates them from any deletion
/// on both sides, scaled so the expected count stays ins_rate per reference token; this keeps
/// measured WER at the rate sum. Inserted tokens are zero-width at the end of
/// the position's token. Unit ids and spans are preserved. The
/// random stream is seeded from spec.seed mixed with the lecture id.
std::vector<SpeechUnit> corrupt_transcript(std::span<const SpeechUnit> units, const NoiseSpec& spec);

struct SweepPoint {
  double target = 0.0;
  double measured_wer = 0.0;   // mean over seeds and lectures
  double f_paragraph = 0.0;    // mean over seeds
  double f_keyword = 0.0;
};

struct SweepReport {
  std::size_t seeds = 0;
  std::size_t top_n = 1;
  std::vector<SweepPoint> points;

  std::string format_table() const;
  nlohmann::json to_json() const;
};

struct SweepOptions {
  std::size_t seeds = 5;
  std::uint64_t base_seed = 1;
  std::size_t top_n = 1;
  PipelineConfig pipeline;
};

/// For each target (a clean 0.0 baseline is added when missing) and seed,
/// corrupts every reference transcript, rebuilds the per-lecture indexes and
/// evaluates both query sets. F is the F of mean R and mean P over all
/// queries of the collection. The confusion vocabulary is the set of
/// reference token surfaces.
SweepReport wer_sweep(const TestCollection& collection, std::span<const double> targets,
                      const SweepOptions& options = {});

}  // namespace lectern
