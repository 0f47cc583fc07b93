#include "semsec/keys.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "semsec/errors.hpp"
#include "semsec/rng.hpp"

namespace semsec {

namespace {

constexpr std::uint64_t kM1 = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kM2 = 0xC2B2AE3D27D4EB4FULL;
constexpr std::uint64_t kM3 = 0xFF51AFD7ED558CCDULL;
constexpr std::uint64_t kM4 = 0xC4CEB9FE1A85EC53ULL;

std::uint64_t absorb(std::uint64_t h, std::uint64_t x) {
  h ^= x * kM2;
  h = std::rotl(h, 31) * kM1;
  return h ^ std::rotr(h, 17);
}

std::uint64_t finish(std::uint64_t h) {
  h ^= h >> 33;
  h *= kM3;
  h ^= h >> 29;
  h *= kM4;
  return h ^ (h >> 32);
}

}  // namespace

std::uint64_t lightweight_hash(std::uint64_t key, std::uint64_t input, std::uint64_t tag) {
  std::uint64_t h = finish(key ^ 0x243F6A8885A308D3ULL);
  h = absorb(h, input);
  h = absorb(h, tag ^ 0x13198A2E03707344ULL);
  return finish(h);
}

Bits expand_seed(std::span<const std::uint8_t> seed, std::uint64_t domain, std::size_t n_bits) {
  if (seed.empty()) {
    throw ParameterError("expand_seed: empty seed");
  }
  const auto words = pack_words(seed);
  Bits out;
  out.reserve(n_bits + 63);
  for (std::uint64_t counter = 0; out.size() < n_bits; ++counter) {
    std::uint64_t h = lightweight_hash(domain, seed.size(), counter);
    for (std::uint64_t w : words) {
      h = lightweight_hash(h, w, counter);
    }
    append_bits(out, h, 64);
  }
  out.resize(n_bits);
  return out;
}

Q32 Q32::from_unit(double x) {
  if (!std::isfinite(x) || x < 0.0) {
    throw ParameterError("Q32::from_unit: value must be finite and >= 0");
  }
  const double scaled = std::floor(x * 0x1.0p32);
  return Q32{scaled >= 0x1.0p32 ? 0xFFFFFFFFU : static_cast<std::uint32_t>(scaled)};
}

std::vector<Q32> weight_stream(std::span<const std::uint8_t> seed, std::size_t n,
                               unsigned bits_per_weight) {
  if (seed.empty()) {
    throw ParameterError("weight_stream: empty seed");
  }
  if (n == 0) {
    throw ParameterError("weight_stream: n must be >= 1");
  }
  if (bits_per_weight < 1 || bits_per_weight > 32) {
    throw ParameterError("weight_stream: bits per weight must lie in [1, 32]");
  }
  const Bits bits = expand_seed(seed, kWeightDomain, n * bits_per_weight);
  std::vector<Q32> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto v = read_bits(bits, i * bits_per_weight, bits_per_weight);
    out[i] = Q32{static_cast<std::uint32_t>(v << (32 - bits_per_weight))};
  }
  return out;
}

Q32 generated_score(Q32 weight, Q32 score) {
  // The product of two Q0.32 fractions is a Q0.64 fraction below 1, so the
  // reduction mod 1 is implicit; keep its top 32 bits.
  return Q32{static_cast<std::uint32_t>((std::uint64_t{weight.raw} * score.raw) >> 32)};
}

Bits SkeyStream::concat() const {
  Bits out;
  out.reserve(keys.size() * key_bits);
  for (std::uint64_t k : keys) {
    append_bits(out, k, key_bits);
  }
  return out;
}

SkeyStream skey_stream(std::span<const double> scores, std::span<const Q32> weights,
                       unsigned key_bits) {
  if (scores.size() != weights.size()) {
    throw ParameterError(fmt::format("skey_stream: {} scores but {} weights", scores.size(),
                                     weights.size()));
  }
  if (key_bits < 1 || key_bits > 64) {
    throw ParameterError("skey_stream: key length must lie in [1, 64]");
  }
  const std::uint64_t mask = key_bits == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << key_bits) - 1;
  SkeyStream s;
  s.key_bits = key_bits;
  s.keys.reserve(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const Q32 g = generated_score(weights[i], Q32::from_unit(scores[i]));
    s.keys.push_back(lightweight_hash(kSkeyHashKey, g.raw, i) & mask);
  }
  return s;
}

SkeyStream skey_stream(const ImportanceVector& iv, std::span<const Q32> weights, unsigned key_bits) {
  return skey_stream(iv.scores, weights, key_bits);
}

Bits derive_seed_key(const SkeyStream& skeys, std::span<const std::uint8_t> plk) {
  const Bits concat = skeys.concat();
  if (concat.empty() || plk.empty()) {
    throw ParameterError("derive_seed_key: empty SKey stream or PLK");
  }
  return concat.size() >= plk.size() ? xor_cycled(concat, plk) : xor_cycled(plk, concat);
}

Bits derive_keystream(const SkeyStream& skeys, std::span<const std::uint8_t> plk,
                      std::size_t length) {
  if (length == 0) {
    throw ParameterError("derive_keystream: length must be >= 1");
  }
  return expand_seed(derive_seed_key(skeys, plk), kKeystreamDomain, length);
}

KeyMaterial make_key_material(Bits plk, SkeyStream skeys, std::size_t keystream_length) {
  KeyMaterial km;
  km.seed_key = derive_seed_key(skeys, plk);
  km.keystream = keystream_length == 0 ? Bits{}
                                       : expand_seed(km.seed_key, kKeystreamDomain, keystream_length);
  km.plk = std::move(plk);
  km.skeys = std::move(skeys);
  return km;
}

double PlkProbe::disagreement_rate() const {
  if (alice.empty()) {
    return 0.0;
  }
  return static_cast<double>(hamming_distance(alice, bob)) / static_cast<double>(alice.size());
}

namespace {

// Insert into a sorted history and return its median.
double push_median(std::vector<double>& sorted, double v) {
  sorted.insert(std::upper_bound(sorted.begin(), sorted.end(), v), v);
  const std::size_t n = sorted.size();
  return n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

}  // namespace

PlkProbe probe_plk(const ChannelRealization& channel, std::size_t n_bits,
                   double measurement_noise, std::uint64_t seed) {
  if (n_bits == 0) {
    throw ParameterError("probe_plk: n_bits must be >= 1");
  }
  if (!(measurement_noise >= 0.0)) {
    throw ParameterError("probe_plk: measurement noise must be >= 0");
  }
  if (channel.freq_response.empty()) {
    throw ParameterError("probe_plk: empty channel");
  }
  std::vector<double> mags(channel.freq_response.size());
  std::transform(channel.freq_response.begin(), channel.freq_response.end(), mags.begin(),
                 [](cplx h) { return std::abs(h); });
  const auto [lo, hi] = std::minmax_element(mags.begin(), mags.end());

  PlkProbe probe;
  if (*hi - *lo <= 1e-12 * *hi) {
    // Flat, static channel: no usable randomness. Both ends fall back to the
    // same seeded bits.
    probe.static_environment = true;
    Rng pad(derive_seed(seed, "plk-static"));
    for (std::size_t j = 0; j < n_bits; ++j) {
      probe.alice.push_back(static_cast<std::uint8_t>(pad.next_u64() >> 63));
    }
    probe.bob = probe.alice;
    return probe;
  }

  Rng temporal(derive_seed(seed, "plk-temporal"));
  Rng noise_a(derive_seed(seed, "plk-alice"));
  Rng noise_b(derive_seed(seed, "plk-bob"));
  std::vector<double> hist_a, hist_b;
  hist_a.reserve(n_bits);
  hist_b.reserve(n_bits);
  probe.alice.reserve(n_bits);
  probe.bob.reserve(n_bits);
  for (std::size_t j = 0; j < n_bits; ++j) {
    const double m = mags[j % mags.size()] * (1.0 + kPlkTemporalVariation * temporal.normal());
    const double a = m + measurement_noise * noise_a.normal();
    const double b = m + measurement_noise * noise_b.normal();
    probe.alice.push_back(a > push_median(hist_a, a) ? 1 : 0);
    probe.bob.push_back(b > push_median(hist_b, b) ? 1 : 0);
  }
  return probe;
}

namespace {

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r = 0;
  if (__builtin_mul_overflow(a, b, &r)) {
    throw ParameterError("search space exponent overflows 64 bits");
  }
  return r;
}

void require_positive(std::uint64_t v, const char* name) {
  if (v == 0) {
    throw ParameterError(fmt::format("search space: {} must be >= 1", name));
  }
}

}  // namespace

SearchSpace SearchSpace::normalized() const {
  SearchSpace s = *this;
  const auto shift = static_cast<unsigned>(std::countr_zero(s.multiplier));
  s.multiplier >>= shift;
  s.log2 += shift;
  return s;
}

std::string SearchSpace::to_string() const {
  return multiplier == 1 ? fmt::format("2^{}", log2) : fmt::format("{} * 2^{}", multiplier, log2);
}

SearchSpace search_space_scores(std::uint64_t l_scores, std::uint64_t n) {
  require_positive(l_scores, "L_scores");
  require_positive(n, "N");
  return {1, checked_mul(l_scores, n)};
}

SearchSpace search_space_skey(std::uint64_t l_skey, std::uint64_t n) {
  require_positive(l_skey, "L_SKey");
  require_positive(n, "N");
  return {1, checked_mul(l_skey, n)};
}

SearchSpace search_space_seed(std::uint64_t l_seedkey) {
  require_positive(l_seedkey, "L_seedkey");
  return {1, l_seedkey};
}

SearchSpace search_space_total(std::uint64_t l_seedkey, std::uint64_t n) {
  require_positive(l_seedkey, "L_seedkey");
  require_positive(n, "N");
  return {n, checked_mul(l_seedkey, n)};
}

SearchSpace search_space_ratio(const SearchSpace& num, const SearchSpace& den) {
  const SearchSpace a = num.normalized();
  const SearchSpace b = den.normalized();
  if (b.multiplier == 0 || a.multiplier % b.multiplier != 0 || a.log2 < b.log2) {
    throw ParameterError("search_space_ratio: quotient is not an integer");
  }
  return {a.multiplier / b.multiplier, a.log2 - b.log2};
}

std::vector<HashVector> read_hash_vectors(std::istream& in) {
  std::vector<HashVector> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line.front() == '#') {
      continue;
    }
    std::istringstream fields(line);
    std::string input, tag, expected, extra;
    if (!(fields >> input >> tag >> expected) || (fields >> extra)) {
      throw FormatError(fmt::format("golden vectors line {}: expected 3 fields", lineno));
    }
    HashVector v;
    v.input = parse_hex(input);
    try {
      v.tag = std::stoull(tag);
    } catch (const std::exception&) {
      throw FormatError(fmt::format("golden vectors line {}: bad tag", lineno));
    }
    v.expected = parse_hex(expected);
    out.push_back(v);
  }
  return out;
}

void write_hash_vectors(std::ostream& out, std::span<const HashVector> vectors) {
  for (const auto& v : vectors) {
    out << to_hex(v.input) << ' ' << v.tag << ' ' << to_hex(v.expected) << '\n';
  }
}

}  // namespace semsec
