#include "lectern/segmentation.hpp"

#include <algorithm>
#include <charconv>

#include "lectern/error.hpp"
#include "lectern/io.hpp"

namespace lectern {
namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  while (true) {
    auto tab = line.find('\t');
    fields.push_back(line.substr(0, tab));
    if (tab == std::string_view::npos) break;
    line.remove_prefix(tab + 1);
  }
  return fields;
}

template <class T>
T parse_int(std::string_view field, std::size_t line_no, std::string_view what) {
  T value{};
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size() || field.empty()) {
    throw ParseError(line_no, "bad " + std::string(what) + " '" + std::string(field) + "'");
  }
  return value;
}

bool is_blank(std::string_view line) {
  return line.find_first_not_of(" \t") == std::string_view::npos;
}

}  // namespace

std::string SpeechUnit::text() const {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += t.surface;
  }
  return out;
}

TranscriptFormat parse_transcript_format(std::string_view name) {
  if (name == "timed" || name == "timed-tokens") return TranscriptFormat::kTimedTokens;
  if (name == "units" || name == "pre-segmented") return TranscriptFormat::kUnits;
  throw ValidationError("unknown transcript format: " + std::string(name));
}

std::vector<TimedToken> parse_timed_tokens(std::string_view content) {
  std::vector<TimedToken> tokens;
  io::for_each_line(content, [&](std::size_t line_no, std::string_view line) {
    if (is_blank(line)) return;
    auto fields = split_tabs(line);
    if (fields.size() != 3) throw ParseError(line_no, "expected surface<TAB>start_ms<TAB>end_ms");
    if (fields[0].empty()) throw ParseError(line_no, "empty surface");
    TimedToken token{std::string(fields[0]), parse_int<std::int64_t>(fields[1], line_no, "start_ms"),
                     parse_int<std::int64_t>(fields[2], line_no, "end_ms")};
    if (token.end_ms < token.start_ms) {
      throw ValidationError("line " + std::to_string(line_no) + ": end_ms < start_ms");
    }
    if (!tokens.empty() && token.start_ms < tokens.back().end_ms) {
      throw ValidationError("line " + std::to_string(line_no) +
                            ": token starts before the previous token ends");
    }
    tokens.push_back(std::move(token));
  });
  return tokens;
}

std::vector<SpeechUnit> parse_units(std::string_view content, std::string_view lecture_id) {
  std::vector<SpeechUnit> units;
  io::for_each_line(content, [&](std::size_t line_no, std::string_view line) {
    if (is_blank(line)) return;
    auto fields = split_tabs(line);
    if (fields.size() != 4 && fields.size() != 3) {
      throw ParseError(line_no, "expected unit_id<TAB>start_ms<TAB>end_ms<TAB>tokens");
    }
    SpeechUnit unit;
    unit.lecture_id = std::string(lecture_id);
    unit.unit_id = parse_int<std::uint32_t>(fields[0], line_no, "unit_id");
    unit.start_ms = parse_int<std::int64_t>(fields[1], line_no, "start_ms");
    unit.end_ms = parse_int<std::int64_t>(fields[2], line_no, "end_ms");
    if (unit.unit_id != units.size()) {
      throw ValidationError("line " + std::to_string(line_no) + ": unit_id " +
                            std::to_string(unit.unit_id) + " out of sequence, expected " +
                            std::to_string(units.size()));
    }
    if (unit.end_ms < unit.start_ms) {
      throw ValidationError("line " + std::to_string(line_no) + ": end_ms < start_ms");
    }
    if (!units.empty() && unit.start_ms < units.back().end_ms) {
      throw ValidationError("line " + std::to_string(line_no) +
                            ": unit starts before the previous unit ends");
    }
    auto words = fields.size() == 4 ? split_whitespace(fields[3]) : std::vector<std::string>{};
    const auto n = static_cast<std::int64_t>(words.size());
    const auto span = unit.end_ms - unit.start_ms;
    for (std::int64_t i = 0; i < n; ++i) {
      unit.tokens.push_back({std::move(words[static_cast<std::size_t>(i)]),
                             unit.start_ms + span * i / n, unit.start_ms + span * (i + 1) / n});
    }
    units.push_back(std::move(unit));
  });
  return units;
}

ParsedTranscript parse_transcript(std::string_view content, TranscriptFormat format,
                                  std::string_view lecture_id) {
  if (format == TranscriptFormat::kTimedTokens) return parse_timed_tokens(content);
  return parse_units(content, lecture_id);
}

void validate_tokens(std::span<const TimedToken> tokens) {
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].end_ms < tokens[i].start_ms) {
      throw ValidationError("token " + std::to_string(i) + ": end_ms < start_ms");
    }
    if (i > 0 && tokens[i].start_ms < tokens[i - 1].end_ms) {
      throw ValidationError("token " + std::to_string(i) + ": unsorted or overlapping");
    }
  }
}

std::vector<SpeechUnit> segment_units(std::span<const TimedToken> tokens, std::int64_t pause_threshold_ms,
                                      std::string_view lecture_id) {
  if (pause_threshold_ms <= 0) throw ValidationError("pause threshold must be positive");
  validate_tokens(tokens);
  std::vector<SpeechUnit> units;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto gap = i == 0 ? 0 : std::max<std::int64_t>(0, tokens[i].start_ms - tokens[i - 1].end_ms);
    if (i == 0 || gap > pause_threshold_ms) {
      SpeechUnit unit;
      unit.unit_id = static_cast<std::uint32_t>(units.size());
      unit.lecture_id = std::string(lecture_id);
      unit.start_ms = tokens[i].start_ms;
      units.push_back(std::move(unit));
    }
    units.back().tokens.push_back(tokens[i]);
    units.back().end_ms = tokens[i].end_ms;
  }
  return units;
}

std::size_t passage_count(std::size_t unit_count, std::uint32_t n_max) {
  std::size_t total = 0;
  for (std::size_t w = 1; w <= std::min<std::size_t>(n_max, unit_count); ++w) total += unit_count - w + 1;
  return total;
}

std::vector<Passage> generate_passages(std::span<const SpeechUnit> units, std::uint32_t n_max,
                                       const TokenizerConfig& tokenizer, std::uint32_t first_passage_id) {
  if (n_max < 1) throw ValidationError("n_max must be at least 1");
  std::vector<std::map<std::string, std::uint32_t>> unit_terms;
  unit_terms.reserve(units.size());
  for (const auto& unit : units) unit_terms.push_back(count_terms(unit.text(), tokenizer));

  std::vector<Passage> passages;
  passages.reserve(passage_count(units.size(), n_max));
  auto next_id = first_passage_id;
  for (std::size_t s = 0; s < units.size(); ++s) {
    Passage p;
    p.lecture_id = units[s].lecture_id;
    p.first_unit = units[s].unit_id;
    p.start_ms = units[s].start_ms;
    for (std::size_t w = 1; w <= n_max && s + w <= units.size(); ++w) {
      const auto& last = units[s + w - 1];
      if (last.lecture_id != p.lecture_id) {
        throw ValidationError("units of several lectures passed to generate_passages");
      }
      for (const auto& [term, count] : unit_terms[s + w - 1]) {
        p.term_counts[term] += count;
        p.dl += count;
      }
      p.width = static_cast<std::uint32_t>(w);
      p.end_ms = last.end_ms;
      p.passage_id = next_id++;
      passages.push_back(p);
    }
  }
  return passages;
}

std::string format_units(std::span<const SpeechUnit> units) {
  std::string out;
  for (const auto& u : units) {
    out += std::to_string(u.unit_id);
    out += '\t';
    out += std::to_string(u.start_ms);
    out += '\t';
    out += std::to_string(u.end_ms);
    out += '\t';
    out += u.text();
    out += '\n';
  }
  return out;
}

}  // namespace lectern
