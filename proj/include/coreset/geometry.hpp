#pragma once

#include <cstdint>
#include <vector>

#include "coreset/metrics.hpp"
#include "coreset/types.hpp"

namespace coreset {

/// Greedy mean matching on `points`: step m+1 takes the unselected x closest
/// to mean*(m+1) - (sum of selected). Returns local row indices in pick order.
std::vector<Index> herding_order(const FloatMatrix& points, std::size_t k);

CoresetResult herding(const FeatureMatrix& features, const LabelVector& labels, std::size_t k, bool balanced);

/// Farthest-point traversal from `initial`: each step adds the unselected
/// point whose distance to its nearest selected point is largest (lowest
/// index on ties). Returns local row indices in pick order.
std::vector<Index> k_center_order(const FloatMatrix& points, DistanceMetric metric, std::size_t k, Index initial);

/// max over points of the distance to the nearest selected point.
double covering_radius(const FloatMatrix& points, DistanceMetric metric, const std::vector<Index>& selected);

/// One seeded random initial point per pool, then farthest-point traversal.
CoresetResult k_center_greedy(const FeatureMatrix& features, const LabelVector& labels, std::size_t k, bool balanced,
                              std::uint64_t seed, DistanceMetric metric = DistanceMetric::euclidean);

/// k-center greedy in prediction space: symmetric KL between softmax rows.
CoresetResult contextual_diversity(const TrainingTrace& trace, const LabelVector& labels, std::size_t k, bool balanced,
                                   std::uint64_t seed);

}  // namespace coreset
