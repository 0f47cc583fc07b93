#include "semsec/feature_maps.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <fmt/format.h>

#include "binary_io.hpp"
#include "semsec/errors.hpp"
#include "semsec/rng.hpp"

namespace semsec {

namespace {

constexpr char kMagic[5] = "SEMF";
constexpr std::uint16_t kVersion = 1;

// Synthetic generator constants: class-signal amplitude and per-pixel noise.
constexpr double kSignalAmplitude = 1.0;
constexpr double kPixelNoise = 0.5;

}  // namespace

FeatureMapSet::FeatureMapSet(std::size_t n_maps, std::size_t height, std::size_t width,
                             std::vector<float> values, std::size_t label, std::string source_id)
    : n_maps_(n_maps),
      height_(height),
      width_(width),
      values_(std::move(values)),
      label_(label),
      source_id_(std::move(source_id)) {
  if (n_maps_ == 0 || height_ == 0 || width_ == 0) {
    throw ParameterError("FeatureMapSet: N, H' and W' must all be >= 1");
  }
  if (values_.size() != n_maps_ * height_ * width_) {
    throw ParameterError(fmt::format("FeatureMapSet: expected {} activations, got {}",
                                     n_maps_ * height_ * width_, values_.size()));
  }
  if (!std::all_of(values_.begin(), values_.end(), [](float v) { return std::isfinite(v); })) {
    throw DataError("FeatureMapSet: non-finite activation");
  }
}

std::span<const float> FeatureMapSet::map(std::size_t i) const {
  if (i >= n_maps_) {
    throw ParameterError(fmt::format("map index {} out of range [0, {})", i, n_maps_));
  }
  return std::span<const float>(values_).subspan(i * map_size(), map_size());
}

bool operator==(const FeatureMapSet& a, const FeatureMapSet& b) {
  return a.n_maps_ == b.n_maps_ && a.height_ == b.height_ && a.width_ == b.width_ &&
         a.label_ == b.label_ && a.values_ == b.values_;
}

std::size_t informative_map_count(std::size_t n_maps) {
  return (4 * n_maps + 9) / 10;  // ceil(0.4 * n_maps), exact in integers
}

Dataset synth_dataset(const SynthParams& p) {
  if (p.n_items == 0 || p.n_maps == 0 || p.height == 0 || p.width == 0) {
    throw ParameterError("synth_dataset: counts and shape must be >= 1");
  }
  if (p.n_classes == 0) {
    throw ParameterError("synth_dataset: zero classes");
  }
  if (p.n_maps < p.n_classes) {
    throw ParameterError("synth_dataset: n_maps must be >= n_classes");
  }
  if (!(p.skew >= 0.0 && p.skew <= 1.0)) {
    throw ParameterError("synth_dataset: skew must lie in [0, 1]");
  }

  const std::size_t informative = informative_map_count(p.n_maps);
  const std::size_t map_size = p.height * p.width;
  Dataset out;
  out.reserve(p.n_items);
  for (std::size_t item = 0; item < p.n_items; ++item) {
    Rng rng(derive_seed(p.seed, "synth-item", item));
    const std::size_t label = rng.below(p.n_classes);
    std::vector<float> values(p.n_maps * map_size);
    for (std::size_t i = 0; i < p.n_maps; ++i) {
      const double amplitude = i < informative ? kSignalAmplitude : kSignalAmplitude * (1.0 - p.skew);
      const double mean = (i % p.n_classes == label) ? amplitude : 0.0;
      for (std::size_t j = 0; j < map_size; ++j) {
        values[i * map_size + j] = static_cast<float>(mean + kPixelNoise * rng.normal());
      }
    }
    out.emplace_back(p.n_maps, p.height, p.width, std::move(values), label,
                     fmt::format("synth-{}-{}", p.seed, item));
  }
  return out;
}

QuantizedPayload quantize_map(std::span<const float> map, unsigned bits_per_sample,
                              std::size_t map_index) {
  if (bits_per_sample < 1 || bits_per_sample > 16) {
    throw ParameterError("quantize_map: bits per sample must lie in [1, 16]");
  }
  if (map.empty()) {
    throw ParameterError("quantize_map: empty map");
  }
  if (!std::all_of(map.begin(), map.end(), [](float v) { return std::isfinite(v); })) {
    throw DataError("quantize_map: non-finite activation");
  }
  const auto [lo, hi] = std::minmax_element(map.begin(), map.end());
  QuantizedPayload q;
  q.map_index = map_index;
  q.min_val = *lo;
  q.max_val = *hi;
  q.bits_per_sample = bits_per_sample;
  q.bits.reserve(map.size() * bits_per_sample);

  const double levels = static_cast<double>((1U << bits_per_sample) - 1);
  const double range = static_cast<double>(q.max_val) - static_cast<double>(q.min_val);
  for (float v : map) {
    std::uint64_t code = 0;
    if (range > 0.0) {
      const double t = (static_cast<double>(v) - q.min_val) / range;
      code = static_cast<std::uint64_t>(std::lround(std::clamp(t, 0.0, 1.0) * levels));
    }
    append_bits(q.bits, code, bits_per_sample);
  }
  return q;
}

std::vector<float> dequantize_map(const QuantizedPayload& q) {
  const unsigned b = q.bits_per_sample;
  if (b < 1 || b > 16 || q.bits.size() % b != 0) {
    throw ParameterError("dequantize_map: bit count is not a multiple of bits per sample");
  }
  const double levels = static_cast<double>((1U << b) - 1);
  const double range = static_cast<double>(q.max_val) - static_cast<double>(q.min_val);
  std::vector<float> out(q.bits.size() / b);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto code = static_cast<double>(read_bits(q.bits, i * b, b));
    out[i] = static_cast<float>(q.min_val + code * range / levels);
  }
  return out;
}

void write_feature_maps(std::ostream& out, const FeatureMapSet& set) {
  constexpr std::size_t kMax = std::numeric_limits<std::uint16_t>::max();
  if (set.n_maps() > kMax || set.height() > kMax || set.width() > kMax || set.label() > kMax) {
    throw ParameterError("write_feature_maps: dimension or label exceeds 16 bits");
  }
  out.write(kMagic, 4);
  detail::put_le<std::uint16_t>(out, kVersion);
  detail::put_le(out, static_cast<std::uint16_t>(set.n_maps()));
  detail::put_le(out, static_cast<std::uint16_t>(set.height()));
  detail::put_le(out, static_cast<std::uint16_t>(set.width()));
  detail::put_le(out, static_cast<std::uint16_t>(set.label()));
  for (float v : set.values()) {
    detail::put_f32(out, v);
  }
}

FeatureMapSet read_feature_maps(std::istream& in, const std::string& source_id) {
  detail::expect_magic(in, kMagic);
  const auto version = detail::get_le<std::uint16_t>(in, "version");
  if (version != kVersion) {
    throw FormatError(fmt::format("unsupported SEMF version {}", version));
  }
  const auto n = detail::get_le<std::uint16_t>(in, "N");
  const auto h = detail::get_le<std::uint16_t>(in, "H'");
  const auto w = detail::get_le<std::uint16_t>(in, "W'");
  const auto label = detail::get_le<std::uint16_t>(in, "label");
  if (n == 0 || h == 0 || w == 0) {
    throw FormatError("SEMF header has a zero dimension");
  }
  const std::size_t count = std::size_t{n} * h * w;
  std::vector<float> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    values[i] = detail::get_f32(in, "activations");
    if (!std::isfinite(values[i])) {
      throw FormatError(fmt::format("non-finite activation at index {}", i));
    }
  }
  return FeatureMapSet(n, h, w, std::move(values), label, source_id);
}

void save_feature_maps(const std::filesystem::path& path, const FeatureMapSet& set) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  write_feature_maps(out, set);
}

FeatureMapSet load_feature_maps(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw FormatError("cannot open " + path.string());
  }
  FeatureMapSet set = read_feature_maps(in, path.string());
  if (in.peek() != std::char_traits<char>::eof()) {
    throw FormatError(path.string() + ": trailing bytes after feature-map record");
  }
  return set;
}

void save_dataset(const std::filesystem::path& path, const Dataset& dataset) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  for (const auto& item : dataset) {
    write_feature_maps(out, item);
  }
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw FormatError("cannot open " + path.string());
  }
  Dataset out;
  while (in.peek() != std::char_traits<char>::eof()) {
    out.push_back(read_feature_maps(in, fmt::format("{}#{}", path.string(), out.size())));
  }
  if (out.empty()) {
    throw FormatError(path.string() + ": empty dataset file");
  }
  return out;
}

}  // namespace semsec
