#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "semsec/bits.hpp"

namespace semsec {

/// N real-valued H'xW' feature maps describing one semantic source item.
/// Activations are stored map-major, row-major within a map.
class FeatureMapSet {
 public:
  FeatureMapSet(std::size_t n_maps, std::size_t height, std::size_t width,
                std::vector<float> values, std::size_t label, std::string source_id = {});

  std::size_t n_maps() const { return n_maps_; }
  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t map_size() const { return height_ * width_; }
  std::size_t label() const { return label_; }
  const std::string& source_id() const { return source_id_; }

  std::span<const float> map(std::size_t i) const;
  std::span<const float> values() const { return values_; }

  /// Content equality: shape, label and activations. The source id is an
  /// opaque tag and does not participate.
  friend bool operator==(const FeatureMapSet& a, const FeatureMapSet& b);

 private:
  std::size_t n_maps_;
  std::size_t height_;
  std::size_t width_;
  std::vector<float> values_;
  std::size_t label_;
  std::string source_id_;
};

using Dataset = std::vector<FeatureMapSet>;

struct SynthParams {
  std::size_t n_items = 200;
  std::size_t n_maps = 10;
  std::size_t height = 8;
  std::size_t width = 8;
  std::size_t n_classes = 4;
  double skew = 1.0;
  std::uint64_t seed = 7;
};

/// Number of maps that carry class signal at full strength.
std::size_t informative_map_count(std::size_t n_maps);

/// Synthetic stand-in for CNN feature extraction. The first
/// informative_map_count(n_maps) maps carry class signal at full amplitude;
/// the rest carry it scaled by (1 - skew). Map i signals class (i mod C).
Dataset synth_dataset(const SynthParams& params);

/// Uniformly quantized bits of one map with its dequantization range.
struct QuantizedPayload {
  std::size_t map_index = 0;
  float min_val = 0.0F;
  float max_val = 0.0F;
  unsigned bits_per_sample = 8;
  Bits bits;
};

QuantizedPayload quantize_map(std::span<const float> map, unsigned bits_per_sample,
                              std::size_t map_index = 0);
std::vector<float> dequantize_map(const QuantizedPayload& payload);

// Binary "SEMF" records. A dataset file is a back-to-back sequence of records.
void write_feature_maps(std::ostream& out, const FeatureMapSet& set);
FeatureMapSet read_feature_maps(std::istream& in, const std::string& source_id = {});

void save_feature_maps(const std::filesystem::path& path, const FeatureMapSet& set);
FeatureMapSet load_feature_maps(const std::filesystem::path& path);
void save_dataset(const std::filesystem::path& path, const Dataset& dataset);
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace semsec
