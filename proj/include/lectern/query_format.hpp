#pragma once

#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "lectern/index.hpp"

namespace lectern {

/// Shortest decimal string that round-trips to the same double.
std::string format_score(double score);

/// One group per line: rank, score, lecture_id, start_ms, end_ms, and the
/// comma-separated unit ids, tab-separated. Ranks start at 1.
std::string format_groups_tsv(std::span<const PassageGroup> groups);

/// Concatenated unit texts of the group (empty when the index has no units).
std::string group_snippet(const InvertedIndex& index, const PassageGroup& group);

/// Playback link `<base>/<lecture_id>?t=<start seconds>`; empty base gives "".
std::string media_link(std::string_view base, const PassageGroup& group);

/// {"groups": [{rank, score, lecture_id, start_ms, end_ms, unit_ids, snippet, media?}]}
nlohmann::json groups_to_json(const InvertedIndex& index, std::span<const PassageGroup> groups,
                              std::string_view media_base = {});

}  // namespace lectern
