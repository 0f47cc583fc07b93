#include "semsec/rng.hpp"

#include <cmath>
#include <numbers>

#include "semsec/errors.hpp"

namespace semsec {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view domain, std::uint64_t index) {
  // FNV-1a over the domain label, then chained through the finalizer.
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : domain) {
    h = (h ^ static_cast<unsigned char>(c)) * 0x100000001B3ULL;
  }
  return mix64(mix64(master ^ h) ^ mix64(index + 0x632BE59BD9B4E019ULL));
}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::below(std::uint64_t bound) {
  if (bound == 0) {
    throw ParameterError("Rng::below: zero bound");
  }
  const std::uint64_t limit = (~std::uint64_t{0} / bound) * bound;
  std::uint64_t x = engine_();
  while (x >= limit) {
    x = engine_();
  }
  return x % bound;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) {
    u1 = uniform();
  }
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

std::complex<double> Rng::complex_normal(double variance) {
  const double s = std::sqrt(variance / 2.0);
  const double re = normal();
  const double im = normal();
  return {s * re, s * im};
}

}  // namespace semsec
