#include "lectern/tokenizer.hpp"

#include "lectern/error.hpp"
#include "lectern/io.hpp"

namespace lectern {
namespace {

// Length of the whitespace code point at text[i], or 0.
std::size_t whitespace_at(std::string_view text, std::size_t i) {
  auto c = static_cast<unsigned char>(text[i]);
  if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f') return 1;
  auto byte = [&](std::size_t k) -> unsigned {
    return i + k < text.size() ? static_cast<unsigned char>(text[i + k]) : 0u;
  };
  if (c == 0xC2 && byte(1) == 0xA0) return 2;                        // U+00A0
  if (c == 0xE1 && byte(1) == 0x9A && byte(2) == 0x80) return 3;     // U+1680
  if (c == 0xE2 && byte(1) == 0x80) {
    auto b = byte(2);
    if ((b >= 0x80 && b <= 0x8A) || b == 0xA8 || b == 0xA9 || b == 0xAF) return 3;  // U+2000..200A, 2028, 2029, 202F
  }
  if (c == 0xE2 && byte(1) == 0x81 && byte(2) == 0x9F) return 3;     // U+205F
  if (c == 0xE3 && byte(1) == 0x80 && byte(2) == 0x80) return 3;     // U+3000
  return 0;
}

template <class F>
void for_each_piece(std::string_view text, F&& f) {
  std::size_t start = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    auto ws = whitespace_at(text, i);
    if (ws == 0) {
      ++i;
      continue;
    }
    if (i > start) f(text.substr(start, i - start));
    i += ws;
    start = i;
  }
  if (start < text.size()) f(text.substr(start));
}

}  // namespace

std::vector<std::string> split_whitespace(std::string_view text) {
  std::vector<std::string> out;
  for_each_piece(text, [&](std::string_view piece) { out.emplace_back(piece); });
  return out;
}

std::vector<std::string> tokenize(std::string_view text, const TokenizerConfig& config) {
  if (config.mode == TokenizerMode::kPreTokenized) return split_whitespace(text);
  std::vector<std::string> out;
  for_each_piece(text, [&](std::string_view piece) {
    std::string term(piece);
    if (config.lowercase) {
      for (auto& ch : term) {
        if (ch >= 'A' && ch <= 'Z') ch = static_cast<char>(ch - 'A' + 'a');
      }
    }
    if (!config.stopwords.contains(term)) out.push_back(std::move(term));
  });
  return out;
}

std::map<std::string, std::uint32_t> count_terms(std::string_view text, const TokenizerConfig& config) {
  std::map<std::string, std::uint32_t> counts;
  for (auto& term : tokenize(text, config)) ++counts[std::move(term)];
  return counts;
}

std::string_view to_string(TokenizerMode mode) {
  return mode == TokenizerMode::kPreTokenized ? "pre-tokenized" : "whitespace";
}

TokenizerMode parse_tokenizer_mode(std::string_view name) {
  if (name == "whitespace") return TokenizerMode::kWhitespace;
  if (name == "pre-tokenized") return TokenizerMode::kPreTokenized;
  throw ValidationError("unknown tokenizer mode: " + std::string(name));
}

std::set<std::string> load_stopwords(const std::string& path) {
  std::set<std::string> words;
  io::for_each_line(io::read_file(path), [&](std::size_t, std::string_view line) {
    for (auto& w : split_whitespace(line)) {
      if (w.starts_with('#')) break;
      words.insert(w);
    }
  });
  return words;
}

}  // namespace lectern
