#include "coreset/boundary.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <limits>
#include <numeric>

#include "coreset/error.hpp"
#include "coreset/metrics.hpp"

namespace coreset {

namespace {

Eigen::Index argmax(const Eigen::VectorXd& v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v(i) > v(best)) best = i;
  }
  return best;
}

}  // namespace

ScoreVector cal_scores(const FeatureMatrix& features, const TrainingTrace& trace, std::size_t k_neighbors) {
  const std::size_t n = features.rows;
  if (trace.softmax.rows != n) throw CapabilityError("cal needs softmax outputs for every sample");
  if (k_neighbors < 1 || k_neighbors >= n) {
    throw ValidationError(fmt::format("k_neighbors = {} must lie in [1, n) with n = {}", k_neighbors, n));
  }
  ScoreVector out;
  out.method = "cal";
  out.higher_is_better = true;
  out.scores.resize(n);
  std::vector<std::pair<double, Index>> dist(n - 1);
  for (Index i = 0; i < n; ++i) {
    std::size_t pos = 0;
    for (Index j = 0; j < n; ++j) {
      if (j != i) dist[pos++] = {distance(features.row(i), features.row(j), DistanceMetric::euclidean), j};
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k_neighbors), dist.end());
    double total = 0.0;
    for (std::size_t r = 0; r < k_neighbors; ++r) {
      total += kl_divergence(trace.softmax.row(dist[r].second), trace.softmax.row(i));
    }
    out.scores[i] = total / static_cast<double>(k_neighbors);
  }
  out.metadata["k_neighbors"] = std::to_string(k_neighbors);
  return out;
}

ScoreVector deepfool_margin_linear(const Eigen::MatrixXd& weights, const Eigen::VectorXd& bias,
                                   const FloatMatrix& penultimate) {
  const auto classes = weights.rows();
  if (classes < 2) throw ValidationError("deepfool needs at least two classes");
  if (bias.size() != classes) throw ValidationError("bias length differs from the number of weight rows");
  if (static_cast<std::size_t>(weights.cols()) != penultimate.cols) {
    throw ValidationError(fmt::format("weights have {} columns but features have {}", weights.cols(), penultimate.cols));
  }
  ScoreVector out;
  out.method = "deepfool";
  out.higher_is_better = false;
  out.scores.resize(penultimate.rows);
  for (std::size_t i = 0; i < penultimate.rows; ++i) {
    Eigen::VectorXd f(weights.cols());
    for (Eigen::Index j = 0; j < f.size(); ++j) f(j) = penultimate(i, static_cast<std::size_t>(j));
    const Eigen::VectorXd z = weights * f + bias;
    const Eigen::Index top = argmax(z);
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < classes; ++c) {
      if (c == top) continue;
      const double denom = (weights.row(top) - weights.row(c)).norm();
      if (denom == 0.0) continue;  // identical class rows never separate
      best = std::min(best, std::abs(z(top) - z(c)) / denom);
    }
    if (!std::isfinite(best)) {
      throw NumericalError(fmt::format("sample {}: every competing class has weights identical to class {}", i, top));
    }
    out.scores[i] = best;
  }
  return out;
}

ScoreVector deepfool_iterative(const ProxyModel* model, const FeatureMatrix& inputs, const DeepFoolOptions& options) {
  if (model == nullptr) throw CapabilityError("deepfool needs a differentiable proxy model");
  if (options.max_iters < 1) throw ValidationError("deepfool max_iters must be >= 1");
  if (inputs.cols != model->input_dim()) {
    throw ValidationError(fmt::format("model expects {} inputs, features have {}", model->input_dim(), inputs.cols));
  }
  const auto classes = static_cast<Eigen::Index>(model->num_classes());
  ScoreVector out;
  out.method = "deepfool";
  out.higher_is_better = false;
  out.scores.assign(inputs.rows, 0.0);
  std::vector<bool> flipped(inputs.rows, false);
  std::size_t total_iters = 0;

  for (std::size_t i = 0; i < inputs.rows; ++i) {
    Eigen::VectorXd x0(static_cast<Eigen::Index>(inputs.cols));
    for (std::size_t j = 0; j < inputs.cols; ++j) x0(static_cast<Eigen::Index>(j)) = inputs(i, j);
    const Eigen::Index original = argmax(model->logits(x0));
    Eigen::VectorXd r_total = Eigen::VectorXd::Zero(x0.size());

    for (std::size_t it = 0; it <= options.max_iters; ++it) {
      const Eigen::VectorXd x = x0 + (1.0 + options.overshoot) * r_total;
      const Eigen::VectorXd z = model->logits(x);
      if (it > 0 && argmax(z) != original) {
        flipped[i] = true;
        break;
      }
      if (it == options.max_iters) break;
      const Eigen::MatrixXd jac = model->input_jacobian(x);
      double best = std::numeric_limits<double>::infinity();
      Eigen::VectorXd best_step;
      for (Eigen::Index c = 0; c < classes; ++c) {
        if (c == original) continue;
        const Eigen::VectorXd w = (jac.row(c) - jac.row(original)).transpose();
        const double wn = w.norm();
        if (wn == 0.0) continue;
        const double gap = std::abs(z(c) - z(original));
        if (gap / wn < best) {
          best = gap / wn;
          best_step = (gap / (wn * wn)) * w;
        }
      }
      if (!std::isfinite(best)) break;  // locally flat: no direction flips the label
      ++total_iters;
      if (best == 0.0) {
        flipped[i] = true;  // already on a boundary
        break;
      }
      r_total += best_step;
    }
    out.scores[i] = r_total.norm();
  }

  double largest = 0.0;
  std::size_t unflipped = 0;
  for (std::size_t i = 0; i < inputs.rows; ++i) {
    if (flipped[i]) largest = std::max(largest, out.scores[i]);
  }
  const double bound = largest > 0.0 ? 10.0 * largest : 1.0;
  for (std::size_t i = 0; i < inputs.rows; ++i) {
    if (!flipped[i]) {
      out.scores[i] = bound;
      ++unflipped;
    }
  }
  out.metadata["unflipped"] = std::to_string(unflipped);
  out.metadata["unflipped_score"] = fmt::format("{}", bound);
  out.metadata["iterations"] = std::to_string(total_iters);
  return out;
}

}  // namespace coreset
