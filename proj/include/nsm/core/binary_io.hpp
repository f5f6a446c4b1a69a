#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <type_traits>

#include "nsm/core/error.hpp"

namespace nsm::binary {

// Fixed little-endian encoding regardless of host byte order.

template <class T>
  requires std::is_trivially_copyable_v<T> && (sizeof(T) <= 8)
void write_le(std::ostream& out, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
  }
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
  requires std::is_trivially_copyable_v<T> && (sizeof(T) <= 8)
T read_le(std::istream& in, const char* what) {
  unsigned char bytes[sizeof(T)];
  in.read(reinterpret_cast<char*>(bytes), sizeof(T));
  if (in.gcount() != static_cast<std::streamsize>(sizeof(T))) {
    throw ParseError(std::string("unexpected end of file while reading ") + what);
  }
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
  }
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

inline void write_string(std::ostream& out, const std::string& s) {
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string read_string(std::istream& in, const char* what, std::uint32_t max_len = 1u << 20) {
  const auto n = read_le<std::uint32_t>(in, what);
  if (n > max_len) throw ParseError(std::string("implausible string length for ") + what);
  std::string s(n, '\0');
  in.read(s.data(), n);
  if (in.gcount() != static_cast<std::streamsize>(n)) {
    throw ParseError(std::string("unexpected end of file while reading ") + what);
  }
  return s;
}

}  // namespace nsm::binary
