#include "semsec/bits.hpp"

#include <bit>
#include <charconv>

#include "semsec/errors.hpp"

namespace semsec {

void append_bits(Bits& out, std::uint64_t value, unsigned width) {
  for (unsigned i = width; i-- > 0;) {
    out.push_back(static_cast<std::uint8_t>((value >> i) & 1U));
  }
}

std::uint64_t read_bits(std::span<const std::uint8_t> bits, std::size_t offset, unsigned width) {
  if (width > 64 || offset + width > bits.size()) {
    throw ParameterError("read_bits: range out of bounds");
  }
  std::uint64_t value = 0;
  for (unsigned i = 0; i < width; ++i) {
    value = (value << 1) | (bits[offset + i] & 1U);
  }
  return value;
}

Bits xor_cycled(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  if (b.empty()) {
    throw ParameterError("xor_cycled: empty key operand");
  }
  Bits out(a.begin(), a.end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] ^= b[i % b.size()];
  }
  return out;
}

void xor_in_place(std::span<std::uint8_t> data, std::span<const std::uint8_t> key) {
  if (key.size() < data.size()) {
    throw ParameterError("xor_in_place: key shorter than data");
  }
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i] ^= key[i];
  }
}

std::size_t hamming_distance(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  if (a.size() != b.size()) {
    throw ParameterError("hamming_distance: length mismatch");
  }
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d += (a[i] ^ b[i]) & 1U;
  }
  return d;
}

std::vector<std::uint64_t> pack_words(std::span<const std::uint8_t> bits) {
  std::vector<std::uint64_t> words((bits.size() + 63) / 64, 0);
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] & 1U) {
      words[i / 64] |= std::uint64_t{1} << (63 - i % 64);
    }
  }
  return words;
}

std::string to_hex(std::uint64_t value, unsigned digits) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s(digits, '0');
  for (unsigned i = 0; i < digits; ++i) {
    s[digits - 1 - i] = kDigits[(value >> (4 * i)) & 0xF];
  }
  return s;
}

std::uint64_t parse_hex(std::string_view text) {
  if (text.starts_with("0x") || text.starts_with("0X")) {
    text.remove_prefix(2);
  }
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value, 16);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw FormatError("invalid hex value '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace semsec
