#pragma once

#include <cstddef>
#include <vector>

#include "semsec/feature_maps.hpp"
#include "semsec/importance.hpp"

namespace semsec {

/// Maps chosen under a semantic-entropy budget.
struct Selection {
  std::vector<std::size_t> indices;  ///< descending score, ties by ascending index
  std::size_t lambda = 0;            ///< == indices.size()
  double residual = 0.0;             ///< confidence - sum of selected scores
  double epsilon = 0.0;
};

/// Map indices ordered by descending score, ties broken by ascending index.
std::vector<std::size_t> score_order(const std::vector<double>& scores);

/// Shortest descending-score prefix whose residual confidence drops strictly
/// below epsilon. epsilon == 0 selects every map. The residual is updated by
/// successive subtraction from the confidence.
Selection select_maps(const ImportanceVector& iv, double epsilon);

/// Mean selected-map count over a dataset, each item scored for the head's
/// predicted class.
double semantic_entropy_estimate(const Dataset& dataset, const HeadParams& head, double epsilon);

}  // namespace semsec
