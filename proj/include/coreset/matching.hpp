#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "coreset/metrics.hpp"
#include "coreset/types.hpp"

namespace coreset {

enum class GradientSpace { error_vector, full_last_layer };

GradientSpace parse_gradient_space(const std::string& name);
std::string to_string(GradientSpace s);

/// Per-sample last-layer gradients, one row per sample, plus their mean.
struct GradientSet {
  Eigen::MatrixXd grads;
  Eigen::VectorXd mean_grad;
};

GradientSet make_gradient_set(Eigen::MatrixXd grads);

/// error_vector:    row i = p_i - y_i                      (g = C)
/// full_last_layer: row i = flatten((p_i - y_i) (x) [f_i; 1]) (g = C*(h+1)),
///                  laid out class-major: entry c*(h+1) + j.
GradientSet build_gradient_set(const TrainingTrace& trace, GradientSpace space);

/// Facility location on sim(i, j) = K - ||g_i - g_j|| (K = max pairwise
/// distance in the pool). Each selected sample is weighted by the number of
/// pool members it is most similar to; weights sum to the pool size.
CoresetResult craig_select(const GradientSet& gs, const LabelVector& labels, std::size_t k, bool balanced,
                           std::size_t dense_cap = kDenseSimilarityCap);

struct OmpResult {
  std::vector<Index> order;           // atoms in pick order (padding last)
  Eigen::VectorXd weights;            // aligned with order; padding gets 0
  std::vector<double> residual_norms; // ||b|| followed by the norm after each solve
  std::size_t padded = 0;
};

/// Orthogonal matching pursuit with a ridge re-fit. `atoms` holds one
/// candidate per row. After each pick, solves
///   min_w ||A_S^T w - b||^2 + lambda ||w||^2
/// on the chosen atoms (negatives clamped to 0 when `nonneg`). Stops once the
/// residual falls below 1e-9 and pads to k by residual correlation.
OmpResult orthogonal_matching_pursuit(const Eigen::MatrixXd& atoms, const Eigen::VectorXd& target, std::size_t k,
                                      double lambda, bool nonneg);

struct GradMatchOptions {
  double lambda = 1.0;
  bool nonneg = true;
};

/// OMP per pool against the pool's mean gradient. Pool weights are rescaled
/// to sum to the pool size.
CoresetResult omp_gradmatch(const GradientSet& gs, const LabelVector& labels, std::size_t k, bool balanced,
                            const GradMatchOptions& options = {});

/// gain_e = eta * <grad_ll(e), v> for every candidate row.
Eigen::VectorXd glister_gains(const Eigen::MatrixXd& ll_grads, const Eigen::VectorXd& v, double eta);

struct GlisterOptions {
  double eta = 0.1;
  std::size_t refresh = 0;  // picks per re-linearization block; 0 = max(1, budget / 10)
};

/// Block-greedy validation-likelihood selection on the last linear layer.
/// Needs the training trace and the validation split of `artifact`.
CoresetResult glister_select(const DatasetArtifact& artifact, std::size_t k, bool balanced,
                             const GlisterOptions& options = {});

}  // namespace coreset
