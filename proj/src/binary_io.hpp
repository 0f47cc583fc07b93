#pragma once

// Little-endian primitives shared by the binary file formats.

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>

#include "semsec/errors.hpp"

namespace semsec::detail {

template <typename UInt>
void put_le(std::ostream& out, UInt value) {
  for (std::size_t i = 0; i < sizeof(UInt); ++i) {
    out.put(static_cast<char>((value >> (8 * i)) & 0xFF));
  }
}

template <typename UInt>
UInt get_le(std::istream& in, const char* what) {
  UInt value = 0;
  for (std::size_t i = 0; i < sizeof(UInt); ++i) {
    const int c = in.get();
    if (c == std::char_traits<char>::eof()) {
      throw FormatError(std::string("truncated input while reading ") + what);
    }
    value |= static_cast<UInt>(static_cast<unsigned char>(c)) << (8 * i);
  }
  return value;
}

inline void put_f32(std::ostream& out, float v) { put_le(out, std::bit_cast<std::uint32_t>(v)); }
inline void put_f64(std::ostream& out, double v) { put_le(out, std::bit_cast<std::uint64_t>(v)); }
inline float get_f32(std::istream& in, const char* what) {
  return std::bit_cast<float>(get_le<std::uint32_t>(in, what));
}
inline double get_f64(std::istream& in, const char* what) {
  return std::bit_cast<double>(get_le<std::uint64_t>(in, what));
}

inline void expect_magic(std::istream& in, const char (&magic)[5]) {
  char got[4] = {};
  in.read(got, 4);
  if (in.gcount() != 4) {
    throw FormatError("truncated input while reading magic");
  }
  for (int i = 0; i < 4; ++i) {
    if (got[i] != magic[i]) {
      throw FormatError(std::string("bad magic, expected ") + magic);
    }
  }
}

}  // namespace semsec::detail
