#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "semsec/feature_maps.hpp"

namespace semsec {

/// GAP -> linear -> softmax classification head. weights is C x N row-major.
struct HeadParams {
  std::size_t n_classes = 0;
  std::size_t n_maps = 0;
  std::vector<double> weights;
  std::vector<double> bias;

  double weight(std::size_t c, std::size_t i) const { return weights[c * n_maps + i]; }
  double& weight(std::size_t c, std::size_t i) { return weights[c * n_maps + i]; }

  /// Throws ParameterError on shape mismatch or non-finite entries.
  void validate() const;

  friend bool operator==(const HeadParams&, const HeadParams&) = default;
};

struct HeadOutput {
  std::vector<double> logits;
  std::vector<double> probs;

  std::size_t argmax() const;
};

/// Spatial mean of every map.
std::vector<double> global_average_pool(const FeatureMapSet& item);

HeadOutput head_forward(const HeadParams& head, const FeatureMapSet& item);
/// Same computation on precomputed GAP features.
HeadOutput head_forward_pooled(const HeadParams& head, std::span<const double> pooled);

struct TrainOptions {
  std::size_t epochs = 200;
  double learning_rate = 0.1;
  std::uint64_t seed = 7;
  /// Called once before training and after every epoch with the mean
  /// training cross-entropy.
  std::function<void(std::size_t epoch, double loss)> on_epoch;
};

/// Seeded initialization: weights uniform in [-0.01, 0.01], zero bias.
HeadParams init_head(std::size_t n_classes, std::size_t n_maps, std::uint64_t seed);

/// Full-batch gradient descent on mean softmax cross-entropy. The class
/// count is 1 + the largest label in the dataset unless `n_classes` is given.
HeadParams train_head(const Dataset& dataset, const TrainOptions& options,
                      std::optional<std::size_t> n_classes = std::nullopt);

double mean_cross_entropy(const HeadParams& head, const Dataset& dataset);
double accuracy(const HeadParams& head, const Dataset& dataset);

/// Per-map task importance for one class, normalized onto the probability
/// scale: scores sum to `confidence` = P(Y = cls | X).
struct ImportanceVector {
  std::vector<double> raw;     ///< gradient-pooled importance before normalization
  std::vector<double> scores;  ///< |raw| rescaled so that sum(scores) == confidence
  double confidence = 0.0;
  std::size_t cls = 0;
};

/// Gradient importance of each map. `cls` defaults to the head's prediction.
///
/// raw_i sums relu(dz_c / dF^i_{m,n}) over every spatial position. The head
/// gives dz_c/dF^i_{m,n} = W[c,i] / (H'W') at each of the H'W' positions, so
/// raw_i = relu(W[c,i]). When every raw_i is zero the confidence is spread
/// uniformly.
ImportanceVector importance(const HeadParams& head, const FeatureMapSet& item,
                            std::optional<std::size_t> cls = std::nullopt);

/// Central-difference reference for the raw importances: perturbs every
/// activation by +-step, differentiates z_c numerically, applies relu and
/// sums per map exactly as `importance` does.
std::vector<double> importance_fd_oracle(const HeadParams& head, const FeatureMapSet& item,
                                         std::size_t cls, double step);

// "SEMH" head parameter files.
void write_head(std::ostream& out, const HeadParams& head);
HeadParams read_head(std::istream& in);
void save_head(const std::filesystem::path& path, const HeadParams& head);
HeadParams load_head(const std::filesystem::path& path);

}  // namespace semsec
