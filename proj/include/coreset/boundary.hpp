#pragma once

#include <Eigen/Dense>

#include "coreset/trainer.hpp"
#include "coreset/types.hpp"

namespace coreset {

/// Mean KL(p_neighbor || p_self) over the k nearest neighbors of each sample
/// in feature space (euclidean, self excluded, lowest index on ties).
ScoreVector cal_scores(const FeatureMatrix& features, const TrainingTrace& trace, std::size_t k_neighbors = 10);

/// Exact distance from each penultimate row to the nearest decision boundary
/// of the linear head (weights C x h, bias C). Smaller = closer = selected
/// first, so the result has higher_is_better = false.
ScoreVector deepfool_margin_linear(const Eigen::MatrixXd& weights, const Eigen::VectorXd& bias,
                                   const FloatMatrix& penultimate);

struct DeepFoolOptions {
  std::size_t max_iters = 50;
  double overshoot = 0.02;
};

/// Iterative DeepFool in input space against a proxy model (null -> error).
/// The score is the norm of the accumulated linearized steps; the overshoot
/// only scales the probe point used to test whether the label flipped.
/// Samples that never flip get 10x the largest flipped score.
ScoreVector deepfool_iterative(const ProxyModel* model, const FeatureMatrix& inputs,
                               const DeepFoolOptions& options = {});

}  // namespace coreset
