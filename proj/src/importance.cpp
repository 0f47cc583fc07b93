#include "semsec/importance.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "binary_io.hpp"
#include "semsec/errors.hpp"
#include "semsec/rng.hpp"

namespace semsec {

namespace {

constexpr char kMagic[5] = "SEMH";
constexpr std::uint16_t kVersion = 1;
constexpr double kInitScale = 0.01;

std::vector<double> softmax(std::span<const double> logits) {
  const double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double sum = 0.0;
  for (std::size_t c = 0; c < logits.size(); ++c) {
    p[c] = std::exp(logits[c] - top);
    sum += p[c];
  }
  for (double& v : p) {
    v /= sum;
  }
  return p;
}

void check_item(const HeadParams& head, const FeatureMapSet& item) {
  if (item.n_maps() != head.n_maps) {
    throw ParameterError(
        fmt::format("head expects {} maps, item has {}", head.n_maps, item.n_maps()));
  }
}

}  // namespace

void HeadParams::validate() const {
  if (n_classes == 0 || n_maps == 0) {
    throw ParameterError("HeadParams: zero classes or maps");
  }
  if (weights.size() != n_classes * n_maps || bias.size() != n_classes) {
    throw ParameterError("HeadParams: parameter sizes do not match C x N");
  }
  auto finite = [](double v) { return std::isfinite(v); };
  if (!std::all_of(weights.begin(), weights.end(), finite) ||
      !std::all_of(bias.begin(), bias.end(), finite)) {
    throw ParameterError("HeadParams: non-finite parameter");
  }
}

std::size_t HeadOutput::argmax() const {
  return static_cast<std::size_t>(std::max_element(probs.begin(), probs.end()) - probs.begin());
}

std::vector<double> global_average_pool(const FeatureMapSet& item) {
  std::vector<double> pooled(item.n_maps());
  const double inv = 1.0 / static_cast<double>(item.map_size());
  for (std::size_t i = 0; i < item.n_maps(); ++i) {
    double sum = 0.0;
    for (float v : item.map(i)) {
      sum += v;
    }
    pooled[i] = sum * inv;
  }
  return pooled;
}

HeadOutput head_forward_pooled(const HeadParams& head, std::span<const double> pooled) {
  if (pooled.size() != head.n_maps) {
    throw ParameterError("head_forward: feature length does not match head");
  }
  HeadOutput out;
  out.logits.resize(head.n_classes);
  for (std::size_t c = 0; c < head.n_classes; ++c) {
    double z = head.bias[c];
    for (std::size_t i = 0; i < head.n_maps; ++i) {
      z += head.weight(c, i) * pooled[i];
    }
    out.logits[c] = z;
  }
  out.probs = softmax(out.logits);
  return out;
}

HeadOutput head_forward(const HeadParams& head, const FeatureMapSet& item) {
  check_item(head, item);
  return head_forward_pooled(head, global_average_pool(item));
}

HeadParams init_head(std::size_t n_classes, std::size_t n_maps, std::uint64_t seed) {
  if (n_classes == 0 || n_maps == 0) {
    throw ParameterError("init_head: zero classes or maps");
  }
  HeadParams head{n_classes, n_maps, std::vector<double>(n_classes * n_maps),
                  std::vector<double>(n_classes, 0.0)};
  Rng rng(derive_seed(seed, "head-init"));
  for (double& w : head.weights) {
    w = kInitScale * (2.0 * rng.uniform() - 1.0);
  }
  return head;
}

namespace {

struct PooledData {
  std::vector<std::vector<double>> features;
  std::vector<std::size_t> labels;
};

PooledData pool_dataset(const Dataset& dataset, std::size_t n_classes, std::size_t n_maps) {
  PooledData d;
  d.features.reserve(dataset.size());
  d.labels.reserve(dataset.size());
  for (const auto& item : dataset) {
    if (item.n_maps() != n_maps) {
      throw ParameterError("train_head: items disagree on map count");
    }
    if (item.label() >= n_classes) {
      throw ParameterError(fmt::format("label {} outside [0, {})", item.label(), n_classes));
    }
    d.features.push_back(global_average_pool(item));
    d.labels.push_back(item.label());
  }
  return d;
}

double pooled_loss(const HeadParams& head, const PooledData& d) {
  double loss = 0.0;
  for (std::size_t n = 0; n < d.features.size(); ++n) {
    const auto out = head_forward_pooled(head, d.features[n]);
    loss -= std::log(std::max(out.probs[d.labels[n]], std::numeric_limits<double>::min()));
  }
  return loss / static_cast<double>(d.features.size());
}

}  // namespace

HeadParams train_head(const Dataset& dataset, const TrainOptions& options,
                      std::optional<std::size_t> n_classes) {
  if (dataset.empty()) {
    throw ParameterError("train_head: empty dataset");
  }
  if (!(options.learning_rate > 0.0)) {
    throw ParameterError("train_head: learning rate must be > 0");
  }
  std::size_t classes = 0;
  if (n_classes) {
    classes = *n_classes;
  } else {
    for (const auto& item : dataset) {
      classes = std::max(classes, item.label() + 1);
    }
  }
  const std::size_t n_maps = dataset.front().n_maps();
  HeadParams head = init_head(classes, n_maps, options.seed);
  const PooledData data = pool_dataset(dataset, classes, n_maps);
  const double inv_count = 1.0 / static_cast<double>(data.features.size());

  if (options.on_epoch) {
    options.on_epoch(0, pooled_loss(head, data));
  }
  std::vector<double> grad_w(head.weights.size());
  std::vector<double> grad_b(classes);
  for (std::size_t epoch = 1; epoch <= options.epochs; ++epoch) {
    std::fill(grad_w.begin(), grad_w.end(), 0.0);
    std::fill(grad_b.begin(), grad_b.end(), 0.0);
    for (std::size_t n = 0; n < data.features.size(); ++n) {
      const auto& x = data.features[n];
      const auto out = head_forward_pooled(head, x);
      for (std::size_t c = 0; c < classes; ++c) {
        const double delta = out.probs[c] - (c == data.labels[n] ? 1.0 : 0.0);
        grad_b[c] += delta;
        for (std::size_t i = 0; i < n_maps; ++i) {
          grad_w[c * n_maps + i] += delta * x[i];
        }
      }
    }
    for (std::size_t k = 0; k < grad_w.size(); ++k) {
      head.weights[k] -= options.learning_rate * grad_w[k] * inv_count;
    }
    for (std::size_t c = 0; c < classes; ++c) {
      head.bias[c] -= options.learning_rate * grad_b[c] * inv_count;
    }
    if (options.on_epoch) {
      options.on_epoch(epoch, pooled_loss(head, data));
    }
  }
  return head;
}

double mean_cross_entropy(const HeadParams& head, const Dataset& dataset) {
  if (dataset.empty()) {
    throw ParameterError("mean_cross_entropy: empty dataset");
  }
  return pooled_loss(head, pool_dataset(dataset, head.n_classes, head.n_maps));
}

double accuracy(const HeadParams& head, const Dataset& dataset) {
  if (dataset.empty()) {
    throw ParameterError("accuracy: empty dataset");
  }
  std::size_t correct = 0;
  for (const auto& item : dataset) {
    correct += head_forward(head, item).argmax() == item.label() ? 1 : 0;
  }
  return static_cast<double>(correct) / static_cast<double>(dataset.size());
}

ImportanceVector importance(const HeadParams& head, const FeatureMapSet& item,
                            std::optional<std::size_t> cls) {
  check_item(head, item);
  const HeadOutput out = head_forward(head, item);
  const std::size_t c = cls.value_or(out.argmax());
  if (c >= head.n_classes) {
    throw ParameterError(fmt::format("class {} outside [0, {})", c, head.n_classes));
  }

  ImportanceVector iv;
  iv.cls = c;
  iv.confidence = out.probs[c];
  iv.raw.resize(head.n_maps);
  for (std::size_t i = 0; i < head.n_maps; ++i) {
    iv.raw[i] = std::max(head.weight(c, i), 0.0);
  }

  iv.scores.resize(head.n_maps);
  const double total = std::accumulate(iv.raw.begin(), iv.raw.end(), 0.0,
                                       [](double acc, double r) { return acc + std::abs(r); });
  for (std::size_t i = 0; i < head.n_maps; ++i) {
    iv.scores[i] = total > 0.0 ? iv.confidence * (std::abs(iv.raw[i]) / total)
                               : iv.confidence / static_cast<double>(head.n_maps);
  }
  return iv;
}

std::vector<double> importance_fd_oracle(const HeadParams& head, const FeatureMapSet& item,
                                         std::size_t cls, double step) {
  check_item(head, item);
  if (!(step > 0.0)) {
    throw ParameterError("importance_fd_oracle: step must be > 0");
  }
  if (cls >= head.n_classes) {
    throw ParameterError(fmt::format("class {} outside [0, {})", cls, head.n_classes));
  }
  std::vector<double> activations(item.values().begin(), item.values().end());
  const std::size_t map_size = item.map_size();
  const double inv = 1.0 / static_cast<double>(map_size);

  // Class logit recomputed from scratch on double-precision activations.
  auto logit = [&]() {
    double z = head.bias[cls];
    for (std::size_t i = 0; i < head.n_maps; ++i) {
      double sum = 0.0;
      for (std::size_t j = 0; j < map_size; ++j) {
        sum += activations[i * map_size + j];
      }
      z += head.weight(cls, i) * sum * inv;
    }
    return z;
  };

  std::vector<double> raw(head.n_maps, 0.0);
  for (std::size_t i = 0; i < head.n_maps; ++i) {
    for (std::size_t j = 0; j < map_size; ++j) {
      double& a = activations[i * map_size + j];
      const double original = a;
      a = original + step;
      const double up = logit();
      a = original - step;
      const double down = logit();
      a = original;
      raw[i] += std::max((up - down) / (2.0 * step), 0.0);
    }
  }
  return raw;
}

void write_head(std::ostream& out, const HeadParams& head) {
  head.validate();
  constexpr std::size_t kMax = std::numeric_limits<std::uint16_t>::max();
  if (head.n_classes > kMax || head.n_maps > kMax) {
    throw ParameterError("write_head: dimensions exceed 16 bits");
  }
  out.write(kMagic, 4);
  detail::put_le<std::uint16_t>(out, kVersion);
  detail::put_le(out, static_cast<std::uint16_t>(head.n_classes));
  detail::put_le(out, static_cast<std::uint16_t>(head.n_maps));
  for (double w : head.weights) {
    detail::put_f64(out, w);
  }
  for (double b : head.bias) {
    detail::put_f64(out, b);
  }
}

HeadParams read_head(std::istream& in) {
  detail::expect_magic(in, kMagic);
  const auto version = detail::get_le<std::uint16_t>(in, "version");
  if (version != kVersion) {
    throw FormatError(fmt::format("unsupported SEMH version {}", version));
  }
  HeadParams head;
  head.n_classes = detail::get_le<std::uint16_t>(in, "C");
  head.n_maps = detail::get_le<std::uint16_t>(in, "N");
  head.weights.resize(head.n_classes * head.n_maps);
  head.bias.resize(head.n_classes);
  for (double& w : head.weights) {
    w = detail::get_f64(in, "weights");
  }
  for (double& b : head.bias) {
    b = detail::get_f64(in, "bias");
  }
  try {
    head.validate();
  } catch (const ParameterError& e) {
    throw FormatError(e.what());
  }
  return head;
}

void save_head(const std::filesystem::path& path, const HeadParams& head) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  write_head(out, head);
}

HeadParams load_head(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw FormatError("cannot open " + path.string());
  }
  return read_head(in);
}

}  // namespace semsec
