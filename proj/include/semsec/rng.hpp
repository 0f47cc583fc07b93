#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <string_view>

namespace semsec {

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Derives an independent child seed from a master seed, a domain label
/// and an index (counter-mode split). Pure function.
std::uint64_t derive_seed(std::uint64_t master, std::string_view domain, std::uint64_t index = 0);

/// Deterministic generator. std::mt19937_64 output is fully specified by the
/// standard; the real-valued draws below are built on raw words so results
/// are identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, 1) with 53-bit resolution.
  double uniform();
  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);
  /// Standard normal (Box-Muller).
  double normal();
  /// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
  std::complex<double> complex_normal(double variance);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace semsec
