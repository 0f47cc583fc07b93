#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "semsec/bits.hpp"
#include "semsec/importance.hpp"
#include "semsec/ofdm.hpp"

namespace semsec {

/// Keyed 64-bit multiply-xor-rotate hash. Frozen by golden vectors in
/// tests/data/hash_golden.txt; any change to it is a format break.
std::uint64_t lightweight_hash(std::uint64_t key, std::uint64_t input, std::uint64_t tag);

/// Public key used when hashing generated scores into SKeys. Only the keys
/// derived from it are secret.
inline constexpr std::uint64_t kSkeyHashKey = 0x53454D454E54524FULL;

/// Domain tags separating the two counter-mode expansions of a seed.
inline constexpr std::uint64_t kWeightDomain = 0x57;
inline constexpr std::uint64_t kKeystreamDomain = 0x4B;

/// Counter-mode expansion of an arbitrary-length seed. Block j is the hash
/// chain of every seed word under counter j, so output j depends on all
/// seed bits. expand(s, d, n1) is a prefix of expand(s, d, n2) for n1 < n2.
Bits expand_seed(std::span<const std::uint8_t> seed, std::uint64_t domain, std::size_t n_bits);

/// Unsigned Q0.32 fixed-point fraction in [0, 1).
struct Q32 {
  std::uint32_t raw = 0;

  double value() const { return static_cast<double>(raw) * 0x1.0p-32; }
  /// floor(x * 2^32), saturating at the largest representable fraction.
  static Q32 from_unit(double x);

  friend bool operator==(Q32, Q32) = default;
};

/// n weights of `bits_per_weight` bits each, drawn from the seed expansion
/// and placed in the top bits of a Q0.32 value.
std::vector<Q32> weight_stream(std::span<const std::uint8_t> seed, std::size_t n,
                               unsigned bits_per_weight);

/// (weight * score) mod 1 in Q0.32.
Q32 generated_score(Q32 weight, Q32 score);

/// Per-map semantic keys.
struct SkeyStream {
  unsigned key_bits = 64;
  std::vector<std::uint64_t> keys;

  /// Keys concatenated in map order, each MSB-first over key_bits bits.
  Bits concat() const;
};

/// SKey_i = lightweight_hash(kSkeyHashKey, generated score i, i) truncated to
/// the low `key_bits` bits (1..64).
SkeyStream skey_stream(std::span<const double> scores, std::span<const Q32> weights,
                       unsigned key_bits = 64);
SkeyStream skey_stream(const ImportanceVector& iv, std::span<const Q32> weights,
                       unsigned key_bits = 64);

/// concat(SKeys) XOR PLK over the longer of the two lengths, the shorter
/// operand cycled.
Bits derive_seed_key(const SkeyStream& skeys, std::span<const std::uint8_t> plk);

/// Keystream of `length` bits expanded from the seed key.
Bits derive_keystream(const SkeyStream& skeys, std::span<const std::uint8_t> plk,
                      std::size_t length);

struct KeyMaterial {
  Bits plk;
  SkeyStream skeys;
  Bits seed_key;
  Bits keystream;
};

KeyMaterial make_key_material(Bits plk, SkeyStream skeys, std::size_t keystream_length);

/// Outcome of reciprocal channel probing by the two legitimate ends.
struct PlkProbe {
  Bits alice;
  Bits bob;
  /// Channel magnitudes were flat: the key was padded with seeded bits.
  bool static_environment = false;

  double disagreement_rate() const;
};

/// Relative size of the shared per-probe temporal channel variation.
inline constexpr double kPlkTemporalVariation = 0.1;

/// Both ends measure |H[k]| (cycling k over subcarriers, with a shared
/// per-probe temporal perturbation plus independent measurement noise) and
/// emit 1 when the measurement exceeds the running median of their own
/// measurements so far.
PlkProbe probe_plk(const ChannelRealization& channel, std::size_t n_bits,
                   double measurement_noise, std::uint64_t seed);

/// multiplier * 2^log2, exact.
struct SearchSpace {
  std::uint64_t multiplier = 1;
  std::uint64_t log2 = 0;

  /// Moves factors of two from the multiplier into the exponent.
  SearchSpace normalized() const;
  std::string to_string() const;

  friend bool operator==(const SearchSpace&, const SearchSpace&) = default;
};

/// (2^L_scores)^N
SearchSpace search_space_scores(std::uint64_t l_scores, std::uint64_t n);
/// (2^L_SKey)^N
SearchSpace search_space_skey(std::uint64_t l_skey, std::uint64_t n);
/// 2^L_seedkey
SearchSpace search_space_seed(std::uint64_t l_seedkey);
/// N * (2^L_seedkey)^N
SearchSpace search_space_total(std::uint64_t l_seedkey, std::uint64_t n);
/// Exact quotient; throws ParameterError when it is not an integer.
SearchSpace search_space_ratio(const SearchSpace& num, const SearchSpace& den);

/// One line of a golden-vector file: "input_hex tag expected_hex".
struct HashVector {
  std::uint64_t input = 0;
  std::uint64_t tag = 0;
  std::uint64_t expected = 0;
};

std::vector<HashVector> read_hash_vectors(std::istream& in);
void write_hash_vectors(std::ostream& out, std::span<const HashVector> vectors);

}  // namespace semsec
