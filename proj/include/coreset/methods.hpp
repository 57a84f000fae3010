#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "coreset/matching.hpp"
#include "coreset/metrics.hpp"
#include "coreset/trainer.hpp"
#include "coreset/types.hpp"

namespace coreset {

/// Every selection method reachable by name, in catalog order.
const std::vector<std::string>& method_names();
bool is_score_method(const std::string& method);

struct MethodOptions {
  std::string method = "random";
  double fraction = 0.1;
  bool balanced = false;
  std::uint64_t seed = 0;

  std::optional<double> lambda;  // gc trade-off (0.5) or gradmatch ridge (1.0)
  std::size_t knn = 10;
  double eta = 0.1;
  std::size_t refresh = 0;
  GradientSpace grad_space = GradientSpace::error_vector;
  DistanceMetric metric = DistanceMetric::euclidean;
  SimilarityKind similarity = SimilarityKind::cosine_shifted;
  bool grand_bias = true;

  // Proxy model retrained for deepfool.
  Arch proxy_arch = Arch::mlp1;
  TrainConfig proxy;
  std::size_t proxy_epochs = 0;  // 0 = the trace's reference epoch (20 without a trace)
};

/// Per-sample scores of a score-based method on one artifact.
ScoreVector compute_scores(const DatasetArtifact& artifact, const MethodOptions& options);

/// Runs the named method. `runs` holds the artifacts whose scores are
/// averaged (empty = just `artifact`); only score methods accept more than one.
CoresetResult run_method(const DatasetArtifact& artifact, const MethodOptions& options,
                         std::span<const DatasetArtifact> runs = {});

}  // namespace coreset
