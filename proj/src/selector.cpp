#include "semsec/selector.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "semsec/errors.hpp"

namespace semsec {

std::vector<std::size_t> score_order(const std::vector<double>& scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

Selection select_maps(const ImportanceVector& iv, double epsilon) {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw ParameterError("select_maps: epsilon must be a finite value >= 0");
  }
  Selection sel;
  sel.epsilon = epsilon;
  sel.residual = iv.confidence;
  const auto order = score_order(iv.scores);
  for (std::size_t idx : order) {
    if (epsilon > 0.0 && sel.residual < epsilon) {
      break;
    }
    sel.indices.push_back(idx);
    sel.residual -= iv.scores[idx];
  }
  sel.lambda = sel.indices.size();
  return sel;
}

double semantic_entropy_estimate(const Dataset& dataset, const HeadParams& head, double epsilon) {
  if (dataset.empty()) {
    throw ParameterError("semantic_entropy_estimate: empty dataset");
  }
  double total = 0.0;
  for (const auto& item : dataset) {
    total += static_cast<double>(select_maps(importance(head, item), epsilon).lambda);
  }
  return total / static_cast<double>(dataset.size());
}

}  // namespace semsec
