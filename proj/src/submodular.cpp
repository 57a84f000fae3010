#include "coreset/submodular.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <queue>

#include "coreset/error.hpp"
#include "coreset/selection.hpp"

namespace coreset {

namespace {

// Incremental marginal gains for one greedy run.
class GainState {
 public:
  explicit GainState(const SubmodularObjective& obj) : obj_(obj), n_(obj.size()), column_(n_) {
    if (obj.kind() == ObjectiveKind::facility_location) {
      best_.assign(n_, 0.0);
    } else {
      colsum_.assign(n_, 0.0);
      inner_.assign(n_, 0.0);
      for (Index j = 0; j < n_; ++j) {
        obj_.similarity().column(j, column_);
        double s = 0.0;
        for (double v : column_) s += v;
        colsum_[j] = s;
      }
    }
  }

  double gain(Index x) {
    if (obj_.kind() == ObjectiveKind::facility_location) {
      obj_.similarity().column(x, column_);
      double g = 0.0;
      for (std::size_t i = 0; i < n_; ++i) g += std::max(0.0, column_[i] - best_[i]);
      return g;
    }
    return colsum_[x] - obj_.lambda() * (2.0 * inner_[x] + obj_.similarity().at(x, x));
  }

  void add(Index x) {
    obj_.similarity().column(x, column_);
    if (obj_.kind() == ObjectiveKind::facility_location) {
      for (std::size_t i = 0; i < n_; ++i) best_[i] = std::max(best_[i], column_[i]);
    } else {
      for (std::size_t i = 0; i < n_; ++i) inner_[i] += column_[i];
    }
  }

 private:
  const SubmodularObjective& obj_;
  std::size_t n_;
  std::vector<double> column_;
  std::vector<double> best_;    // facility location: current coverage of each i
  std::vector<double> colsum_;  // graph cut: sum_i sim(i, x)
  std::vector<double> inner_;   // graph cut: sum_{s in S} sim(s, x)
};

GreedyResult naive_greedy(const SubmodularObjective& obj, std::size_t k) {
  GainState state(obj);
  std::vector<bool> chosen(obj.size(), false);
  GreedyResult r;
  for (std::size_t step = 0; step < k; ++step) {
    Index best = obj.size();
    double best_gain = 0.0;
    for (Index x = 0; x < obj.size(); ++x) {
      if (chosen[x]) continue;
      const double g = state.gain(x);
      if (best == obj.size() || g > best_gain) {
        best = x;
        best_gain = g;
      }
    }
    chosen[best] = true;
    state.add(best);
    r.order.push_back(best);
    r.gains.push_back(best_gain);
    r.value += best_gain;
  }
  return r;
}

GreedyResult lazy_greedy(const SubmodularObjective& obj, std::size_t k) {
  struct Entry {
    double bound;
    Index index;
    std::size_t stamp;  // number of picks when `bound` was computed
  };
  const auto worse = [](const Entry& a, const Entry& b) {
    if (a.bound != b.bound) return a.bound < b.bound;
    return a.index > b.index;
  };
  GainState state(obj);
  std::priority_queue<Entry, std::vector<Entry>, decltype(worse)> heap(worse);
  for (Index x = 0; x < obj.size(); ++x) heap.push({state.gain(x), x, 0});

  GreedyResult r;
  while (r.order.size() < k) {
    Entry top = heap.top();
    heap.pop();
    if (top.stamp == r.order.size()) {
      state.add(top.index);
      r.order.push_back(top.index);
      r.gains.push_back(top.bound);
      r.value += top.bound;
    } else {
      heap.push({state.gain(top.index), top.index, r.order.size()});
    }
  }
  return r;
}

}  // namespace

ObjectiveKind parse_objective_kind(const std::string& name) {
  if (name == "fl" || name == "facility_location") return ObjectiveKind::facility_location;
  if (name == "gc" || name == "graph_cut") return ObjectiveKind::graph_cut;
  throw ValidationError("unknown submodular objective '" + name + "'");
}

std::string to_string(ObjectiveKind k) {
  return k == ObjectiveKind::facility_location ? "facility_location" : "graph_cut";
}

SubmodularObjective::SubmodularObjective(ObjectiveKind kind, std::shared_ptr<const SimilarityKernel> sim,
                                         double lambda)
    : kind_(kind), sim_(std::move(sim)), lambda_(lambda) {
  if (!sim_) throw ValidationError("submodular objective needs a similarity");
  if (!(lambda_ >= 0.0)) throw ValidationError("graph cut lambda must be >= 0");
}

SubmodularObjective::SubmodularObjective(ObjectiveKind kind, SimilarityMatrix sim, double lambda)
    : SubmodularObjective(kind, make_dense_kernel(std::move(sim)), lambda) {}

double SubmodularObjective::evaluate(std::span<const Index> subset) const {
  const std::size_t n = size();
  for (Index s : subset) {
    if (s >= n) throw ValidationError(fmt::format("subset index {} outside [0, {})", s, n));
  }
  if (subset.empty()) return 0.0;
  double value = 0.0;
  if (kind_ == ObjectiveKind::facility_location) {
    for (Index i = 0; i < n; ++i) {
      double best = sim_->at(i, subset[0]);
      for (Index s : subset) best = std::max(best, sim_->at(i, s));
      value += best;
    }
    return value;
  }
  double redundancy = 0.0;
  for (Index j : subset) {
    for (Index i = 0; i < n; ++i) value += sim_->at(i, j);
    for (Index i : subset) redundancy += sim_->at(i, j);
  }
  return value - lambda_ * redundancy;
}

GreedyResult greedy_maximize(const SubmodularObjective& objective, std::size_t k, bool lazy) {
  if (k > objective.size()) {
    throw ValidationError(fmt::format("greedy budget {} exceeds ground set size {}", k, objective.size()));
  }
  return lazy ? lazy_greedy(objective, k) : naive_greedy(objective, k);
}

BruteForceResult brute_force_optimum(const SubmodularObjective& objective, std::size_t k) {
  const std::size_t n = objective.size();
  if (k > n) throw ValidationError(fmt::format("budget {} exceeds ground set size {}", k, n));
  double combos = 1.0;
  for (std::size_t i = 0; i < k; ++i) combos = combos * static_cast<double>(n - i) / static_cast<double>(i + 1);
  if (combos > 1e6 + 0.5) throw ValidationError(fmt::format("C({}, {}) exceeds the 1e6 enumeration budget", n, k));

  std::vector<Index> current(k);
  for (std::size_t i = 0; i < k; ++i) current[i] = i;
  BruteForceResult best{current, objective.evaluate(current)};
  while (true) {
    // Next combination in lexicographic order.
    std::size_t i = k;
    while (i > 0 && current[i - 1] == n - k + (i - 1)) --i;
    if (i == 0) break;
    ++current[i - 1];
    for (std::size_t j = i; j < k; ++j) current[j] = current[j - 1] + 1;
    const double v = objective.evaluate(current);
    if (v > best.value) best = {current, v};
  }
  return best;
}

CoresetResult submodular_select(const FeatureMatrix& features, const LabelVector& labels, std::size_t k, bool balanced,
                                const SubmodularOptions& options) {
  std::vector<Index> picked;
  for (const auto& pool : make_pools(labels, k, balanced)) {
    if (pool.budget == 0) continue;
    const auto kernel = make_similarity_kernel(gather_rows(features, pool.members), options.similarity, options.dense_cap);
    const SubmodularObjective objective(options.kind, kernel, options.lambda);
    for (Index local : greedy_maximize(objective, pool.budget, true).order) picked.push_back(pool.members[local]);
  }
  auto r = make_result(options.kind == ObjectiveKind::facility_location ? "fl" : "gc", labels.size(), std::move(picked), 0);
  r.params["similarity"] = to_string(options.similarity);
  if (options.kind == ObjectiveKind::graph_cut) r.params["lambda"] = fmt::format("{}", options.lambda);
  return r;
}

}  // namespace coreset
