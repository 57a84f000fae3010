#pragma once

#include <Eigen/Dense>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "coreset/types.hpp"

namespace coreset {

enum class DistanceMetric { euclidean, cosine, sym_kl };
enum class SimilarityKind { cosine_shifted, rbf, neg_euclidean_shifted };

DistanceMetric parse_distance_metric(const std::string& name);
SimilarityKind parse_similarity_kind(const std::string& name);
std::string to_string(DistanceMetric m);
std::string to_string(SimilarityKind k);

inline constexpr double kProbabilityFloor = 1e-12;

/// Default size above which similarity matrices are computed on demand
/// instead of materialized.
inline constexpr std::size_t kDenseSimilarityCap = 20000;

struct DistanceMatrix {
  Eigen::MatrixXd values;
  DistanceMetric metric = DistanceMetric::euclidean;
};

struct SimilarityMatrix {
  Eigen::MatrixXd values;
  SimilarityKind kind = SimilarityKind::cosine_shifted;
};

/// KL(p || q) with both arguments floored at kProbabilityFloor.
double kl_divergence(std::span<const float> p, std::span<const float> q);

/// Distance between two rows. Throws for a zero-norm row under cosine.
double distance(std::span<const float> a, std::span<const float> b, DistanceMetric metric);

/// Throws ValidationError unless each row is nonnegative and sums to 1 within 1e-4.
void check_probability_rows(const FloatMatrix& m, const std::string& what);

DistanceMatrix pairwise_distance(const FloatMatrix& a, const FloatMatrix& b, DistanceMetric metric);

SimilarityMatrix similarity_from_features(const FloatMatrix& a, SimilarityKind kind);

FloatMatrix gather_rows(const FloatMatrix& m, std::span<const Index> rows);

/// Read-only access to a symmetric nonnegative similarity, dense or computed
/// on demand.
class SimilarityKernel {
 public:
  virtual ~SimilarityKernel() = default;
  virtual std::size_t size() const = 0;
  virtual double at(std::size_t i, std::size_t j) const = 0;
  /// out[i] = sim(i, j) for every i.
  virtual void column(std::size_t j, std::span<double> out) const;
};

std::shared_ptr<const SimilarityKernel> make_dense_kernel(SimilarityMatrix sim);

/// Dense when rows <= cap, otherwise rows are recomputed on demand
/// (cosine_shifted and neg_euclidean_shifted only).
std::shared_ptr<const SimilarityKernel> make_similarity_kernel(const FloatMatrix& features, SimilarityKind kind,
                                                               std::size_t cap = kDenseSimilarityCap);

}  // namespace coreset
