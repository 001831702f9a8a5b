#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace lectern {

enum class TokenizerMode { kWhitespace, kPreTokenized };

struct TokenizerConfig {
  bool lowercase = true;
  std::set<std::string> stopwords;
  TokenizerMode mode = TokenizerMode::kWhitespace;

  friend bool operator==(const TokenizerConfig&, const TokenizerConfig&) = default;
};

/// Splits on Unicode whitespace. In whitespace mode terms are ASCII-lowercased
/// (when enabled) and stopwords are dropped after lowercasing; pre-tokenized
/// input is only split.
std::vector<std::string> tokenize(std::string_view text, const TokenizerConfig& config);

/// Term frequencies of tokenize(text, config).
std::map<std::string, std::uint32_t> count_terms(std::string_view text, const TokenizerConfig& config);

/// Splits on the same whitespace set as tokenize, no other processing.
std::vector<std::string> split_whitespace(std::string_view text);

std::string_view to_string(TokenizerMode mode);
TokenizerMode parse_tokenizer_mode(std::string_view name);

/// One stopword per line; blank lines and lines starting with '#' are skipped.
std::set<std::string> load_stopwords(const std::string& path);

}  // namespace lectern
