#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace lectern::io {

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

/// Versioned binary container: 8-byte magic, u32 format version, u64 payload
/// length, u32 CRC-32 of the payload, then the payload. All integers
/// little-endian.
std::string wrap_container(std::string_view magic, std::uint32_t version, std::string_view payload);

/// Returns the payload. Throws FormatError on wrong magic, version mismatch,
/// truncation, trailing bytes or checksum mismatch.
std::string unwrap_container(std::string_view bytes, std::string_view magic, std::uint32_t version);

/// Splits on '\n', dropping a trailing '\r' from each line.
template <class F>
void for_each_line(std::string_view content, F&& f) {
  std::size_t line_no = 0;
  while (!content.empty()) {
    auto nl = content.find('\n');
    auto line = content.substr(0, nl);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    f(++line_no, line);
    if (nl == std::string_view::npos) break;
    content.remove_prefix(nl + 1);
  }
}

}  // namespace lectern::io
