#include "coreset/geometry.hpp"

#include <fmt/format.h>

#include <limits>

#include "coreset/error.hpp"
#include "coreset/rng.hpp"
#include "coreset/selection.hpp"

namespace coreset {

std::vector<Index> herding_order(const FloatMatrix& points, std::size_t k) {
  const std::size_t n = points.rows;
  const std::size_t d = points.cols;
  if (k > n) throw ValidationError(fmt::format("herding budget {} exceeds pool size {}", k, n));
  std::vector<double> mean(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) mean[j] += points(i, j);
  }
  for (double& v : mean) v /= static_cast<double>(n);

  std::vector<double> running(d, 0.0);
  std::vector<double> target(d);
  std::vector<bool> chosen(n, false);
  std::vector<Index> order;
  order.reserve(k);
  for (std::size_t m = 0; m < k; ++m) {
    for (std::size_t j = 0; j < d; ++j) target[j] = mean[j] * static_cast<double>(m + 1) - running[j];
    Index best = n;
    double best_dist = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < n; ++i) {
      if (chosen[i]) continue;
      double dist = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double diff = target[j] - points(i, j);
        dist += diff * diff;
      }
      if (dist < best_dist) {
        best_dist = dist;
        best = i;
      }
    }
    chosen[best] = true;
    order.push_back(best);
    for (std::size_t j = 0; j < d; ++j) running[j] += points(best, j);
  }
  return order;
}

CoresetResult herding(const FeatureMatrix& features, const LabelVector& labels, std::size_t k, bool balanced) {
  std::vector<Index> picked;
  for (const auto& pool : make_pools(labels, k, balanced)) {
    if (pool.budget == 0) continue;
    for (Index local : herding_order(gather_rows(features, pool.members), pool.budget)) {
      picked.push_back(pool.members[local]);
    }
  }
  return make_result("herding", labels.size(), std::move(picked), 0);
}

std::vector<Index> k_center_order(const FloatMatrix& points, DistanceMetric metric, std::size_t k, Index initial) {
  const std::size_t n = points.rows;
  if (k > n) throw ValidationError(fmt::format("k-center budget {} exceeds pool size {}", k, n));
  if (k == 0) return {};
  if (initial >= n) throw ValidationError("k-center initial index outside the pool");
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  std::vector<bool> chosen(n, false);
  std::vector<Index> order{initial};
  chosen[initial] = true;
  Index last = initial;
  while (order.size() < k) {
    Index best = n;
    double best_dist = -1.0;
    for (Index i = 0; i < n; ++i) {
      if (chosen[i]) continue;
      nearest[i] = std::min(nearest[i], distance(points.row(i), points.row(last), metric));
      if (nearest[i] > best_dist) {
        best_dist = nearest[i];
        best = i;
      }
    }
    chosen[best] = true;
    order.push_back(best);
    last = best;
  }
  return order;
}

double covering_radius(const FloatMatrix& points, DistanceMetric metric, const std::vector<Index>& selected) {
  double radius = 0.0;
  for (Index i = 0; i < points.rows; ++i) {
    double nearest = std::numeric_limits<double>::infinity();
    for (Index s : selected) nearest = std::min(nearest, distance(points.row(i), points.row(s), metric));
    radius = std::max(radius, nearest);
  }
  return radius;
}

namespace {

CoresetResult k_center_pools(const FloatMatrix& space, const LabelVector& labels, std::size_t k, bool balanced,
                             std::uint64_t seed, DistanceMetric metric, std::string method) {
  const CounterRng base(seed, Stream::select);
  std::vector<Index> picked;
  for (const auto& pool : make_pools(labels, k, balanced)) {
    if (pool.budget == 0) continue;
    auto rng = base.split(static_cast<std::uint64_t>(pool.label + 1));
    const auto initial = static_cast<Index>(rng.below(pool.members.size()));
    for (Index local : k_center_order(gather_rows(space, pool.members), metric, pool.budget, initial)) {
      picked.push_back(pool.members[local]);
    }
  }
  auto r = make_result(std::move(method), labels.size(), std::move(picked), seed);
  r.params["metric"] = to_string(metric);
  return r;
}

}  // namespace

CoresetResult k_center_greedy(const FeatureMatrix& features, const LabelVector& labels, std::size_t k, bool balanced,
                              std::uint64_t seed, DistanceMetric metric) {
  if (metric == DistanceMetric::sym_kl) check_probability_rows(features, "features");
  return k_center_pools(features, labels, k, balanced, seed, metric, "kcenter");
}

CoresetResult contextual_diversity(const TrainingTrace& trace, const LabelVector& labels, std::size_t k, bool balanced,
                                   std::uint64_t seed) {
  if (trace.softmax.rows != labels.size()) throw CapabilityError("trace has no softmax outputs");
  check_probability_rows(trace.softmax, "softmax");
  return k_center_pools(trace.softmax, labels, k, balanced, seed, DistanceMetric::sym_kl, "cd");
}

}  // namespace coreset
