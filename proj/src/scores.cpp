#include "coreset/scores.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "coreset/error.hpp"
#include "coreset/rng.hpp"
#include "coreset/selection.hpp"

namespace coreset {

namespace {

void require_softmax(const TrainingTrace& t) {
  if (t.softmax.rows == 0 || t.softmax.cols == 0) throw CapabilityError("trace has no softmax outputs");
}

void require_error_vectors(const TrainingTrace& t) {
  if (t.error_vectors.rows == 0) throw CapabilityError("trace has no error_vectors");
}

ScoreVector make_scores(std::string method, std::vector<double> s, bool higher_is_better = true) {
  ScoreVector out;
  out.scores = std::move(s);
  out.higher_is_better = higher_is_better;
  out.method = std::move(method);
  return out;
}

double row_norm(std::span<const float> r) {
  double s = 0.0;
  for (float v : r) s += static_cast<double>(v) * v;
  return std::sqrt(s);
}

// Binary indexed tree over sampling mass; supports weighted draws with removal.
class MassTree {
 public:
  explicit MassTree(std::span<const double> w) : tree_(w.size() + 1, 0.0), weights_(w.begin(), w.end()) {
    for (std::size_t i = 0; i < w.size(); ++i) add(i, w[i]);
    total_ = std::accumulate(w.begin(), w.end(), 0.0);
  }

  double total() const { return total_; }

  void remove(std::size_t i) {
    add(i, -weights_[i]);
    total_ -= weights_[i];
    weights_[i] = 0.0;
  }

  /// Position whose cumulative interval contains `target`.
  std::size_t find(double target) const {
    std::size_t pos = 0;
    std::size_t step = 1;
    while (step * 2 < tree_.size()) step *= 2;
    for (; step > 0; step /= 2) {
      if (pos + step < tree_.size() && tree_[pos + step] <= target) {
        pos += step;
        target -= tree_[pos];
      }
    }
    if (pos < weights_.size() && weights_[pos] > 0.0) return pos;
    // Rounding in the partial sums landed on an empty slot; take the last
    // positive slot at or before it, else the first positive one after.
    for (std::size_t i = std::min(pos, weights_.size() - 1) + 1; i-- > 0;) {
      if (weights_[i] > 0.0) return i;
    }
    for (std::size_t i = pos; i < weights_.size(); ++i) {
      if (weights_[i] > 0.0) return i;
    }
    return weights_.size();
  }

 private:
  void add(std::size_t i, double v) {
    for (std::size_t k = i + 1; k < tree_.size(); k += k & (~k + 1)) tree_[k] += v;
  }

  std::vector<double> tree_;
  std::vector<double> weights_;
  double total_ = 0.0;
};

}  // namespace

ScoreVector least_confidence(const TrainingTrace& trace) {
  require_softmax(trace);
  std::vector<double> s(trace.softmax.rows);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto row = trace.softmax.row(i);
    s[i] = 1.0 - static_cast<double>(*std::max_element(row.begin(), row.end()));
  }
  return make_scores("lc", std::move(s));
}

ScoreVector entropy_score(const TrainingTrace& trace) {
  require_softmax(trace);
  std::vector<double> s(trace.softmax.rows);
  for (std::size_t i = 0; i < s.size(); ++i) {
    double h = 0.0;
    for (float p : trace.softmax.row(i)) {
      if (p > 0.0f) h -= static_cast<double>(p) * std::log(static_cast<double>(p));
    }
    s[i] = h;
  }
  return make_scores("entropy", std::move(s));
}

ScoreVector margin_score(const TrainingTrace& trace) {
  require_softmax(trace);
  if (trace.softmax.cols < 2) throw ValidationError("margin needs at least two classes");
  std::vector<double> s(trace.softmax.rows);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto row = trace.softmax.row(i);
    // The predicted class is the argmax; the margin is to the runner-up.
    double top = -1.0;
    double second = -1.0;
    for (float p : row) {
      const double v = p;
      if (v > top) {
        second = top;
        top = v;
      } else if (v > second) {
        second = v;
      }
    }
    s[i] = 1.0 - (top - second);
  }
  return make_scores("margin", std::move(s));
}

ScoreVector forgetting_count(const TrainingTrace& trace) {
  if (trace.num_epochs < 2) {
    throw CapabilityError(fmt::format("forgetting needs correctness for at least 2 epochs, trace has {}",
                                      trace.num_epochs));
  }
  const std::size_t n = trace.correctness.size() / trace.num_epochs;
  std::vector<double> s(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    bool ever_correct = false;
    std::size_t events = 0;
    for (std::size_t t = 0; t < trace.num_epochs; ++t) {
      const bool now = trace.correct(t, i);
      ever_correct = ever_correct || now;
      if (t + 1 < trace.num_epochs && now && !trace.correct(t + 1, i)) ++events;
    }
    s[i] = ever_correct ? static_cast<double>(events) : static_cast<double>(trace.num_epochs);
  }
  return make_scores("forgetting", std::move(s));
}

ScoreVector el2n_score(const TrainingTrace& trace) {
  require_error_vectors(trace);
  std::vector<double> s(trace.error_vectors.rows);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = row_norm(trace.error_vectors.row(i));
  return make_scores("el2n", std::move(s));
}

ScoreVector grand_score(const TrainingTrace& trace, bool include_bias) {
  require_error_vectors(trace);
  if (trace.penultimate.rows != trace.error_vectors.rows) throw CapabilityError("trace has no penultimate features");
  std::vector<double> s(trace.error_vectors.rows);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double f = row_norm(trace.penultimate.row(i));
    s[i] = row_norm(trace.error_vectors.row(i)) * std::sqrt(f * f + (include_bias ? 1.0 : 0.0));
  }
  return make_scores("grand", std::move(s));
}

std::vector<double> sensitivity_probabilities(const TrainingTrace& trace) {
  if (trace.losses.empty()) throw CapabilityError("trace has no losses");
  double total = 0.0;
  for (float l : trace.losses) total += l;
  if (!(total > 0.0)) throw NumericalError("all losses are zero; sensitivity probabilities are undefined");
  std::vector<double> p(trace.losses.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = static_cast<double>(trace.losses[i]) / total;
  return p;
}

ScoreVector average_scores(std::span<const ScoreVector> runs) {
  if (runs.empty()) throw ValidationError("no score vectors to average");
  ScoreVector out = runs.front();
  for (std::size_t r = 1; r < runs.size(); ++r) {
    if (runs[r].scores.size() != out.scores.size() || runs[r].higher_is_better != out.higher_is_better) {
      throw ValidationError(fmt::format("run {} disagrees with run 0 on sample count or score orientation", r));
    }
    for (std::size_t i = 0; i < out.scores.size(); ++i) out.scores[i] += runs[r].scores[i];
  }
  for (double& v : out.scores) v /= static_cast<double>(runs.size());
  out.metadata["runs"] = std::to_string(runs.size());
  return out;
}

CoresetResult select_by_score(const ScoreVector& s, const LabelVector& labels, std::size_t k, bool balanced,
                              std::uint64_t seed) {
  if (s.scores.size() != labels.size()) {
    throw ValidationError(fmt::format("{} scores for {} labels", s.scores.size(), labels.size()));
  }
  for (std::size_t i = 0; i < s.scores.size(); ++i) {
    if (!std::isfinite(s.scores[i])) throw NumericalError(fmt::format("score {} is not finite", i));
  }
  std::vector<Index> picked;
  for (auto& pool : make_pools(labels, k, balanced)) {
    auto& m = pool.members;
    const auto better = [&](Index a, Index b) {
      if (s.scores[a] != s.scores[b]) return s.higher_is_better ? s.scores[a] > s.scores[b] : s.scores[a] < s.scores[b];
      return a < b;
    };
    std::partial_sort(m.begin(), m.begin() + static_cast<std::ptrdiff_t>(pool.budget), m.end(), better);
    picked.insert(picked.end(), m.begin(), m.begin() + static_cast<std::ptrdiff_t>(pool.budget));
  }
  auto r = make_result(s.method, labels.size(), std::move(picked), seed);
  r.metadata = s.metadata;
  return r;
}

CoresetResult importance_sample(const TrainingTrace& trace, const LabelVector& labels, std::size_t k, bool balanced,
                                std::uint64_t seed) {
  if (trace.losses.size() != labels.size()) throw CapabilityError("trace has no losses");
  std::vector<double> mass(trace.losses.begin(), trace.losses.end());
  const CounterRng base(seed, Stream::select);
  std::vector<Index> picked;
  std::size_t fallback = 0;
  for (const auto& pool : make_pools(labels, k, balanced)) {
    auto rng = base.split(static_cast<std::uint64_t>(pool.label + 1));
    std::vector<double> w(pool.members.size());
    for (std::size_t j = 0; j < w.size(); ++j) w[j] = mass[pool.members[j]];
    MassTree tree(w);
    std::vector<bool> taken(w.size(), false);
    std::size_t drawn = 0;
    std::size_t positive = static_cast<std::size_t>(std::count_if(w.begin(), w.end(), [](double v) { return v > 0.0; }));
    for (; drawn < pool.budget && positive > 0; ++drawn, --positive) {
      const std::size_t j = tree.find(rng.uniform() * tree.total());
      taken[j] = true;
      tree.remove(j);
      picked.push_back(pool.members[j]);
    }
    if (drawn < pool.budget) {
      // Positive mass exhausted: uniform over what is left.
      std::vector<std::size_t> rest;
      for (std::size_t j = 0; j < w.size(); ++j) {
        if (!taken[j]) rest.push_back(j);
      }
      for (std::size_t i = 0; drawn < pool.budget; ++i, ++drawn, ++fallback) {
        const auto r = i + static_cast<std::size_t>(rng.below(rest.size() - i));
        std::swap(rest[i], rest[r]);
        picked.push_back(pool.members[rest[i]]);
      }
    }
  }
  auto r = make_result("importance", labels.size(), std::move(picked), seed);
  if (fallback > 0) r.metadata["uniform_fallback"] = std::to_string(fallback);
  return r;
}

}  // namespace coreset
