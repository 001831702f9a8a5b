#include "lectern/io.hpp"

#include <zlib.h>

#include <array>
#include <cstring>
#include <fstream>
#include <sstream>

#include "lectern/error.hpp"

namespace lectern::io {
namespace {

constexpr std::size_t kMagicSize = 8;
constexpr std::size_t kHeaderSize = kMagicSize + 4 + 8 + 4;

template <class T>
void put_le(std::string& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((value >> (8 * i)) & 0xff));
  }
}

template <class T>
T get_le(std::string_view in) {
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    value |= static_cast<T>(static_cast<unsigned char>(in[i])) << (8 * i);
  }
  return value;
}

std::array<char, kMagicSize> padded_magic(std::string_view magic) {
  std::array<char, kMagicSize> out{};
  std::memcpy(out.data(), magic.data(), std::min(magic.size(), kMagicSize));
  return out;
}

std::uint32_t crc(std::string_view payload) {
  uLong value = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks for large payloads.
  while (!payload.empty()) {
    auto chunk = std::min<std::size_t>(payload.size(), 1u << 30);
    value = crc32(value, reinterpret_cast<const Bytef*>(payload.data()), static_cast<uInt>(chunk));
    payload.remove_prefix(chunk);
  }
  return static_cast<std::uint32_t>(value);
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed: " + path);
  return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("write failed: " + path);
}

std::string wrap_container(std::string_view magic, std::uint32_t version, std::string_view payload) {
  std::string out;
  out.reserve(kHeaderSize + payload.size());
  auto m = padded_magic(magic);
  out.append(m.data(), m.size());
  put_le<std::uint32_t>(out, version);
  put_le<std::uint64_t>(out, payload.size());
  put_le<std::uint32_t>(out, crc(payload));
  out.append(payload);
  return out;
}

std::string unwrap_container(std::string_view bytes, std::string_view magic, std::uint32_t version) {
  if (bytes.size() < kHeaderSize) throw FormatError("truncated header");
  auto m = padded_magic(magic);
  if (std::memcmp(bytes.data(), m.data(), kMagicSize) != 0) throw FormatError("bad magic");
  auto found = get_le<std::uint32_t>(bytes.substr(kMagicSize));
  if (found != version) {
    throw FormatError("format version " + std::to_string(found) + ", expected " + std::to_string(version));
  }
  auto length = get_le<std::uint64_t>(bytes.substr(kMagicSize + 4));
  auto expected_crc = get_le<std::uint32_t>(bytes.substr(kMagicSize + 12));
  auto payload = bytes.substr(kHeaderSize);
  if (payload.size() < length) throw FormatError("truncated payload");
  if (payload.size() > length) throw FormatError("trailing bytes after payload");
  if (crc(payload) != expected_crc) throw FormatError("checksum mismatch");
  return std::string(payload);
}

}  // namespace lectern::io
