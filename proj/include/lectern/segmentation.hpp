#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "lectern/tokenizer.hpp"

namespace lectern {

inline constexpr std::int64_t kDefaultPauseMs = 500;
inline constexpr std::uint32_t kDefaultMaxWidth = 5;

struct TimedToken {
  std::string surface;
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;

  friend bool operator==(const TimedToken&, const TimedToken&) = default;
};

/// Pause-delimited run of tokens. unit_id is the temporal index inside the lecture.
struct SpeechUnit {
  std::uint32_t unit_id = 0;
  std::string lecture_id;
  std::vector<TimedToken> tokens;
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;

  std::string text() const;

  friend bool operator==(const SpeechUnit&, const SpeechUnit&) = default;
};

/// Window of `width` consecutive units starting at `first_unit` of one lecture.
struct Passage {
  std::uint32_t passage_id = 0;
  std::string lecture_id;
  std::uint32_t first_unit = 0;
  std::uint32_t width = 0;
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;
  std::map<std::string, std::uint32_t> term_counts;
  std::uint32_t dl = 0;

  std::uint32_t end_unit() const { return first_unit + width; }
};

enum class TranscriptFormat { kTimedTokens, kUnits };

TranscriptFormat parse_transcript_format(std::string_view name);

/// `surface<TAB>start_ms<TAB>end_ms` per line. Blank lines are ignored.
/// Throws ParseError for malformed lines and ValidationError (naming the line)
/// for end < start, unsorted or overlapping tokens.
std::vector<TimedToken> parse_timed_tokens(std::string_view content);

/// `unit_id<TAB>start_ms<TAB>end_ms<TAB>tokens` per line. Unit ids must run
/// 0,1,2,... in temporal order. Per-token times are interpolated evenly
/// across the unit span.
std::vector<SpeechUnit> parse_units(std::string_view content, std::string_view lecture_id);

using ParsedTranscript = std::variant<std::vector<TimedToken>, std::vector<SpeechUnit>>;

ParsedTranscript parse_transcript(std::string_view content, TranscriptFormat format,
                                  std::string_view lecture_id);

/// Throws ValidationError if tokens are unsorted, overlapping or inverted.
void validate_tokens(std::span<const TimedToken> tokens);

/// Starts a new unit wherever next.start - prev.end exceeds the threshold.
/// Gaps are clamped at zero, so abutting tokens never split.
std::vector<SpeechUnit> segment_units(std::span<const TimedToken> tokens,
                                      std::int64_t pause_threshold_ms,
                                      std::string_view lecture_id = {});

/// Every window [s, s+w) for w in 1..min(n_max, U). Ids are assigned
/// consecutively from `first_passage_id` in (start, width) order.
std::vector<Passage> generate_passages(std::span<const SpeechUnit> units, std::uint32_t n_max,
                                       const TokenizerConfig& tokenizer,
                                       std::uint32_t first_passage_id = 0);

/// Σ_{w=1..min(n_max,U)} (U - w + 1).
std::size_t passage_count(std::size_t unit_count, std::uint32_t n_max);

/// Inverse of parse_units.
std::string format_units(std::span<const SpeechUnit> units);

}  // namespace lectern
