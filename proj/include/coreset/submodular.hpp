#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "coreset/metrics.hpp"
#include "coreset/types.hpp"

namespace coreset {

enum class ObjectiveKind { facility_location, graph_cut };

ObjectiveKind parse_objective_kind(const std::string& name);  // "fl" | "gc" or full names
std::string to_string(ObjectiveKind k);

/// Set function over a similarity kernel.
///   facility location: f(S) = sum_{i in V} max_{j in S} sim(i, j)
///   graph cut:         f(S) = sum_{i in V, j in S} sim(i, j) - lambda * sum_{i, j in S} sim(i, j)
/// Both have f(empty) = 0.
class SubmodularObjective {
 public:
  SubmodularObjective(ObjectiveKind kind, std::shared_ptr<const SimilarityKernel> sim, double lambda = 0.5);
  SubmodularObjective(ObjectiveKind kind, SimilarityMatrix sim, double lambda = 0.5);

  ObjectiveKind kind() const { return kind_; }
  double lambda() const { return lambda_; }
  std::size_t size() const { return sim_->size(); }
  const SimilarityKernel& similarity() const { return *sim_; }

  double evaluate(std::span<const Index> subset) const;

 private:
  ObjectiveKind kind_;
  std::shared_ptr<const SimilarityKernel> sim_;
  double lambda_;
};

struct GreedyResult {
  std::vector<Index> order;   // pick order
  std::vector<double> gains;  // marginal gain of each pick
  double value = 0.0;         // sum of gains
};

/// Exactly k greedy steps (through negative gains if they occur), lowest
/// index on ties. The lazy variant keeps stale gains in a max-heap and
/// returns the same sequence as the naive scan.
GreedyResult greedy_maximize(const SubmodularObjective& objective, std::size_t k, bool lazy);

struct BruteForceResult {
  std::vector<Index> subset;
  double value = 0.0;
};

/// Exhaustive search over all k-subsets (lexicographically first on ties).
/// Refuses instances with more than 1e6 subsets.
BruteForceResult brute_force_optimum(const SubmodularObjective& objective, std::size_t k);

struct SubmodularOptions {
  ObjectiveKind kind = ObjectiveKind::facility_location;
  double lambda = 0.5;
  SimilarityKind similarity = SimilarityKind::cosine_shifted;
  std::size_t dense_cap = kDenseSimilarityCap;
};

/// Per-pool similarity, lazy greedy, pools merged. Uniform weights.
CoresetResult submodular_select(const FeatureMatrix& features, const LabelVector& labels, std::size_t k, bool balanced,
                                const SubmodularOptions& options = {});

}  // namespace coreset
