#pragma once

#include <string>
#include <vector>

#include "lectern/index.hpp"
#include "lectern/segmentation.hpp"

namespace testing_support {

/// One lecture whose units carry the given texts, 1 s apart.
inline std::vector<lectern::SpeechUnit> units_from_texts(const std::vector<std::string>& texts,
                                                         const std::string& lecture = "lec") {
  std::string content;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    content += std::to_string(i) + "\t" + std::to_string(i * 1000) + "\t" + std::to_string(i * 1000 + 800) +
               "\t" + texts[i] + "\n";
  }
  return lectern::parse_units(content, lecture);
}

inline std::string join(const std::vector<std::string>& terms) {
  std::string out;
  for (const auto& t : terms) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

/// Index with one passage per text (n_max = 1).
inline lectern::InvertedIndex single_unit_index(const std::vector<std::string>& texts,
                                                const lectern::ScoringParams& params = {}) {
  auto units = units_from_texts(texts);
  auto passages = lectern::generate_passages(units, 1, {});
  return lectern::build_index(passages, params, {}, units);
}

}  // namespace testing_support
