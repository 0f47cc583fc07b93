#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace semsec {

/// One bit per element, each 0 or 1. Bit order is MSB-first wherever
/// integers are serialized into bits.
using Bits = std::vector<std::uint8_t>;

/// Appends the low `width` bits of `value`, most significant first.
void append_bits(Bits& out, std::uint64_t value, unsigned width);

/// Reads `width` bits starting at `offset` as an unsigned integer (MSB-first).
std::uint64_t read_bits(std::span<const std::uint8_t> bits, std::size_t offset, unsigned width);

/// Element-wise XOR; `b` is cycled when shorter than `a`.
Bits xor_cycled(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);

void xor_in_place(std::span<std::uint8_t> data, std::span<const std::uint8_t> key);

std::size_t hamming_distance(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);

/// Packs bits into 64-bit words, MSB-first, zero-padding the tail word.
std::vector<std::uint64_t> pack_words(std::span<const std::uint8_t> bits);

std::string to_hex(std::uint64_t value, unsigned digits = 16);
std::uint64_t parse_hex(std::string_view text);

}  // namespace semsec
