#include "lectern/query_format.hpp"

#include <charconv>
#include <array>

namespace lectern {

std::string format_score(double score) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), score);
  return std::string(buf.data(), ptr);
}

std::string format_groups_tsv(std::span<const PassageGroup> groups) {
  std::string out;
  std::size_t rank = 0;
  for (const auto& g : groups) {
    out += std::to_string(++rank);
    out += '\t';
    out += format_score(g.score);
    out += '\t';
    out += g.lecture_id;
    out += '\t';
    out += std::to_string(g.start_ms);
    out += '\t';
    out += std::to_string(g.end_ms);
    out += '\t';
    for (auto u = g.first_unit; u < g.end_unit; ++u) {
      if (u != g.first_unit) out += ',';
      out += std::to_string(u);
    }
    out += '\n';
  }
  return out;
}

std::string group_snippet(const InvertedIndex& index, const PassageGroup& group) {
  auto lecture = index.lecture_index(group.lecture_id);
  if (!lecture) return {};
  std::string out;
  for (const auto& u : index.units(*lecture)) {
    if (u.unit_id < group.first_unit || u.unit_id >= group.end_unit || u.text.empty()) continue;
    if (!out.empty()) out += ' ';
    out += u.text;
  }
  return out;
}

std::string media_link(std::string_view base, const PassageGroup& group) {
  if (base.empty()) return {};
  std::string out(base);
  if (out.back() != '/') out += '/';
  out += group.lecture_id;
  out += "?t=";
  out += std::to_string(group.start_ms / 1000);
  return out;
}

nlohmann::json groups_to_json(const InvertedIndex& index, std::span<const PassageGroup> groups,
                              std::string_view media_base) {
  auto list = nlohmann::json::array();
  std::size_t rank = 0;
  for (const auto& g : groups) {
    std::vector<std::uint32_t> ids;
    for (auto u = g.first_unit; u < g.end_unit; ++u) ids.push_back(u);
    nlohmann::json item = {
        {"rank", ++rank},       {"score", g.score},     {"lecture_id", g.lecture_id},
        {"start_ms", g.start_ms}, {"end_ms", g.end_ms}, {"unit_ids", ids},
        {"snippet", group_snippet(index, g)},
    };
    if (auto link = media_link(media_base, g); !link.empty()) item["media"] = link;
    list.push_back(std::move(item));
  }
  return {{"groups", std::move(list)}};
}

}  // namespace lectern
