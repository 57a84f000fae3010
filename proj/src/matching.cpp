#include "coreset/matching.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "coreset/error.hpp"
#include "coreset/selection.hpp"
#include "coreset/submodular.hpp"

namespace coreset {

namespace {

constexpr double kResidualStop = 1e-9;

Eigen::MatrixXd gather(const Eigen::MatrixXd& m, const std::vector<Index>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = m.row(static_cast<Eigen::Index>(rows[r]));
  return out;
}

// sim(i, j) = K - ||g_i - g_j|| computed on demand for pools above the cap.
class GradientDistanceKernel final : public SimilarityKernel {
 public:
  GradientDistanceKernel(Eigen::MatrixXd g, double shift) : g_(std::move(g)), shift_(shift) {}
  std::size_t size() const override { return static_cast<std::size_t>(g_.rows()); }
  double at(std::size_t i, std::size_t j) const override {
    return shift_ - (g_.row(static_cast<Eigen::Index>(i)) - g_.row(static_cast<Eigen::Index>(j))).norm();
  }

 private:
  Eigen::MatrixXd g_;
  double shift_;
};

double pair_distance(const Eigen::MatrixXd& g, Eigen::Index i, Eigen::Index j) { return (g.row(i) - g.row(j)).norm(); }

// Argmax of |<atom, residual>| over atoms not yet used; lowest index on ties.
Index most_correlated(const Eigen::VectorXd& corr, const std::vector<bool>& used) {
  Index best = used.size();
  double best_val = -1.0;
  for (Index j = 0; j < used.size(); ++j) {
    if (used[j]) continue;
    const double v = std::abs(corr(static_cast<Eigen::Index>(j)));
    if (v > best_val) {
      best_val = v;
      best = j;
    }
  }
  return best;
}

// Last-layer state for re-linearized GLISTER: logits are recovered from the
// stored softmax (up to a per-row constant) and shifted by delta * [f; 1].
struct LastLayerView {
  const FloatMatrix* softmax;
  const FloatMatrix* penultimate;
  const LabelVector* labels;

  std::size_t width() const { return penultimate->cols + 1; }

  // (p - y) for sample i under the perturbation delta (C x (h+1)).
  Eigen::VectorXd error(Index i, const Eigen::MatrixXd& delta, bool unperturbed) const {
    const auto classes = static_cast<Eigen::Index>(softmax->cols);
    Eigen::VectorXd p(classes);
    if (unperturbed) {
      for (Eigen::Index c = 0; c < classes; ++c) p(c) = (*softmax)(i, static_cast<std::size_t>(c));
    } else {
      Eigen::VectorXd f1(static_cast<Eigen::Index>(width()));
      for (std::size_t j = 0; j < penultimate->cols; ++j) f1(static_cast<Eigen::Index>(j)) = (*penultimate)(i, j);
      f1(f1.size() - 1) = 1.0;
      const Eigen::VectorXd shift = delta * f1;
      for (Eigen::Index c = 0; c < classes; ++c) {
        p(c) = std::log(std::max(static_cast<double>((*softmax)(i, static_cast<std::size_t>(c))), kProbabilityFloor)) + shift(c);
      }
      p = (p.array() - p.maxCoeff()).exp();
      p /= p.sum();
    }
    p(labels->labels[i]) -= 1.0;
    return p;
  }

  // Flattened log-likelihood gradient -(p - y) (x) [f; 1], class-major.
  Eigen::VectorXd ll_grad(Index i, const Eigen::MatrixXd& delta, bool unperturbed) const {
    const Eigen::VectorXd err = error(i, delta, unperturbed);
    const auto w = static_cast<Eigen::Index>(width());
    Eigen::VectorXd out(err.size() * w);
    for (Eigen::Index c = 0; c < err.size(); ++c) {
      for (Eigen::Index j = 0; j + 1 < w; ++j) out(c * w + j) = -err(c) * (*penultimate)(i, static_cast<std::size_t>(j));
      out(c * w + w - 1) = -err(c);
    }
    return out;
  }
};

}  // namespace

GradientSpace parse_gradient_space(const std::string& name) {
  if (name == "error_vector") return GradientSpace::error_vector;
  if (name == "full_last_layer") return GradientSpace::full_last_layer;
  throw ValidationError("unknown gradient space '" + name + "'");
}

std::string to_string(GradientSpace s) {
  return s == GradientSpace::error_vector ? "error_vector" : "full_last_layer";
}

GradientSet make_gradient_set(Eigen::MatrixXd grads) {
  GradientSet gs;
  gs.mean_grad = grads.rows() > 0 ? Eigen::VectorXd(grads.colwise().mean().transpose())
                                  : Eigen::VectorXd::Zero(grads.cols());
  gs.grads = std::move(grads);
  return gs;
}

GradientSet build_gradient_set(const TrainingTrace& trace, GradientSpace space) {
  const auto& ev = trace.error_vectors;
  if (ev.rows == 0) throw CapabilityError("trace has no error_vectors");
  const auto n = static_cast<Eigen::Index>(ev.rows);
  const auto classes = static_cast<Eigen::Index>(ev.cols);
  if (space == GradientSpace::error_vector) {
    Eigen::MatrixXd g(n, classes);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index c = 0; c < classes; ++c) g(i, c) = ev(static_cast<std::size_t>(i), static_cast<std::size_t>(c));
    }
    return make_gradient_set(std::move(g));
  }
  if (trace.penultimate.rows != ev.rows) throw CapabilityError("trace has no penultimate features");
  const auto w = static_cast<Eigen::Index>(trace.penultimate.cols + 1);
  Eigen::MatrixXd g(n, classes * w);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto row = trace.penultimate.row(static_cast<std::size_t>(i));
    for (Eigen::Index c = 0; c < classes; ++c) {
      const double e = ev(static_cast<std::size_t>(i), static_cast<std::size_t>(c));
      for (Eigen::Index j = 0; j + 1 < w; ++j) g(i, c * w + j) = e * static_cast<double>(row[static_cast<std::size_t>(j)]);
      g(i, c * w + w - 1) = e;
    }
  }
  return make_gradient_set(std::move(g));
}

CoresetResult craig_select(const GradientSet& gs, const LabelVector& labels, std::size_t k, bool balanced,
                           std::size_t dense_cap) {
  if (static_cast<std::size_t>(gs.grads.rows()) != labels.size()) {
    throw ValidationError("gradient set and labels disagree on n");
  }
  std::vector<Index> picked;
  std::vector<float> weights;
  for (const auto& pool : make_pools(labels, k, balanced)) {
    if (pool.budget == 0) continue;
    const Eigen::MatrixXd g = gather(gs.grads, pool.members);
    const auto m = g.rows();
    double shift = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = i + 1; j < m; ++j) shift = std::max(shift, pair_distance(g, i, j));
    }
    std::shared_ptr<const SimilarityKernel> kernel;
    if (static_cast<std::size_t>(m) <= dense_cap) {
      SimilarityMatrix sim{Eigen::MatrixXd(m, m), SimilarityKind::neg_euclidean_shifted};
      for (Eigen::Index i = 0; i < m; ++i) {
        sim.values(i, i) = shift;
        for (Eigen::Index j = i + 1; j < m; ++j) sim.values(i, j) = sim.values(j, i) = shift - pair_distance(g, i, j);
      }
      kernel = make_dense_kernel(std::move(sim));
    } else {
      kernel = std::make_shared<GradientDistanceKernel>(g, shift);
    }
    const SubmodularObjective objective(ObjectiveKind::facility_location, kernel);
    auto chosen = greedy_maximize(objective, pool.budget, true).order;
    std::sort(chosen.begin(), chosen.end());

    // Each member goes to its most similar representative; representatives
    // own themselves, remaining ties go to the lower index.
    std::vector<std::size_t> cluster(chosen.size(), 0);
    std::vector<bool> is_chosen(static_cast<std::size_t>(m), false);
    for (std::size_t s = 0; s < chosen.size(); ++s) {
      is_chosen[chosen[s]] = true;
      ++cluster[s];
    }
    for (Index i = 0; i < static_cast<Index>(m); ++i) {
      if (is_chosen[i]) continue;
      std::size_t best = 0;
      double best_sim = kernel->at(i, chosen[0]);
      for (std::size_t s = 1; s < chosen.size(); ++s) {
        const double v = kernel->at(i, chosen[s]);
        if (v > best_sim) {
          best_sim = v;
          best = s;
        }
      }
      ++cluster[best];
    }
    for (std::size_t s = 0; s < chosen.size(); ++s) {
      picked.push_back(pool.members[chosen[s]]);
      weights.push_back(static_cast<float>(cluster[s]));
    }
  }
  return make_result("craig", labels.size(), std::move(picked), std::move(weights), 0);
}

OmpResult orthogonal_matching_pursuit(const Eigen::MatrixXd& atoms, const Eigen::VectorXd& target, std::size_t k,
                                      double lambda, bool nonneg) {
  const auto m = static_cast<std::size_t>(atoms.rows());
  if (k > m) throw ValidationError(fmt::format("OMP budget {} exceeds {} atoms", k, m));
  if (atoms.cols() != target.size()) throw ValidationError("OMP atoms and target differ in dimension");
  if (!(lambda >= 0.0)) throw ValidationError("OMP ridge lambda must be >= 0");

  OmpResult out;
  std::vector<bool> used(m, false);
  Eigen::VectorXd residual = target;
  Eigen::VectorXd w;
  out.residual_norms.push_back(residual.norm());
  while (out.order.size() < k && residual.norm() >= kResidualStop) {
    const Index pick = most_correlated(atoms * residual, used);
    used[pick] = true;
    out.order.push_back(pick);

    const Eigen::MatrixXd a = gather(atoms, out.order);  // |S| x g
    if (lambda > 0.0) {
      Eigen::MatrixXd normal = a * a.transpose();
      normal.diagonal().array() += lambda;
      w = normal.ldlt().solve(a * target);
    } else {
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a.transpose());
      if (qr.rank() < static_cast<Eigen::Index>(out.order.size())) {
        throw NumericalError(fmt::format(
            "OMP least-squares system is singular at step {} (duplicate or dependent atoms); use lambda > 0",
            out.order.size()));
      }
      w = qr.solve(target);
    }
    if (nonneg) w = w.cwiseMax(0.0);
    residual = target - a.transpose() * w;
    out.residual_norms.push_back(residual.norm());
  }

  out.weights = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k));
  if (!out.order.empty()) out.weights.head(w.size()) = w;
  if (out.order.size() < k) {
    // Residual is exhausted: fill the budget by correlation with what is left.
    const Eigen::VectorXd corr = (atoms * residual).cwiseAbs();
    std::vector<Index> rest;
    for (Index j = 0; j < m; ++j) {
      if (!used[j]) rest.push_back(j);
    }
    std::stable_sort(rest.begin(), rest.end(), [&](Index a, Index b) {
      return corr(static_cast<Eigen::Index>(a)) > corr(static_cast<Eigen::Index>(b));
    });
    out.padded = k - out.order.size();
    out.order.insert(out.order.end(), rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(out.padded));
  }
  return out;
}

CoresetResult omp_gradmatch(const GradientSet& gs, const LabelVector& labels, std::size_t k, bool balanced,
                            const GradMatchOptions& options) {
  if (static_cast<std::size_t>(gs.grads.rows()) != labels.size()) {
    throw ValidationError("gradient set and labels disagree on n");
  }
  std::vector<Index> picked;
  std::vector<float> weights;
  std::size_t padded = 0;
  std::size_t uniform_pools = 0;
  for (const auto& pool : make_pools(labels, k, balanced)) {
    if (pool.budget == 0) continue;
    const Eigen::MatrixXd g = gather(gs.grads, pool.members);
    const Eigen::VectorXd target = g.colwise().mean().transpose();
    const auto omp = orthogonal_matching_pursuit(g, target, pool.budget, options.lambda, options.nonneg);
    padded += omp.padded;
    const double total = omp.weights.sum();
    const double pool_size = static_cast<double>(pool.members.size());
    for (std::size_t s = 0; s < omp.order.size(); ++s) {
      picked.push_back(pool.members[omp.order[s]]);
      const double w = total > 0.0 ? omp.weights(static_cast<Eigen::Index>(s)) * pool_size / total
                                   : pool_size / static_cast<double>(pool.budget);
      weights.push_back(static_cast<float>(w));
    }
    if (!(total > 0.0)) ++uniform_pools;
  }
  auto r = make_result("gradmatch", labels.size(), std::move(picked), std::move(weights), 0);
  r.params["lambda"] = fmt::format("{}", options.lambda);
  r.params["nonneg"] = options.nonneg ? "true" : "false";
  if (padded > 0) r.metadata["zero_weight_padding"] = std::to_string(padded);
  if (uniform_pools > 0) r.metadata["uniform_weight_pools"] = std::to_string(uniform_pools);
  return r;
}

Eigen::VectorXd glister_gains(const Eigen::MatrixXd& ll_grads, const Eigen::VectorXd& v, double eta) {
  if (ll_grads.cols() != v.size()) throw ValidationError("GLISTER gradients and validation gradient differ in size");
  return eta * (ll_grads * v);
}

CoresetResult glister_select(const DatasetArtifact& artifact, std::size_t k, bool balanced,
                             const GlisterOptions& options) {
  if (!artifact.trace) throw CapabilityError("glister needs a training trace (softmax.dctf, penultimate.dctf)");
  if (!artifact.validation) throw CapabilityError("glister needs a validation split (val_* tensors)");
  if (!(options.eta > 0.0)) throw ValidationError("glister eta must be > 0");
  const auto& tr = *artifact.trace;
  const auto& val = *artifact.validation;
  const LastLayerView train_view{&tr.softmax, &tr.penultimate, &artifact.labels};
  const LastLayerView val_view{&val.trace.softmax, &val.trace.penultimate, &val.labels};
  const auto classes = static_cast<Eigen::Index>(tr.softmax.cols);
  const auto width = static_cast<Eigen::Index>(train_view.width());

  std::vector<Index> picked;
  for (const auto& pool : make_pools(artifact.labels, k, balanced)) {
    if (pool.budget == 0) continue;
    const std::size_t block = options.refresh > 0 ? options.refresh : std::max<std::size_t>(1, pool.budget / 10);
    Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(classes, width);
    std::vector<bool> taken(pool.members.size(), false);
    std::size_t count = 0;
    bool fresh = true;
    while (count < pool.budget) {
      Eigen::VectorXd v = Eigen::VectorXd::Zero(classes * width);
      for (Index i = 0; i < val.features.rows; ++i) v += val_view.ll_grad(i, delta, fresh);

      std::vector<std::size_t> open;
      for (std::size_t j = 0; j < taken.size(); ++j) {
        if (!taken[j]) open.push_back(j);
      }
      Eigen::MatrixXd cand(static_cast<Eigen::Index>(open.size()), classes * width);
      for (std::size_t r = 0; r < open.size(); ++r) {
        cand.row(static_cast<Eigen::Index>(r)) = train_view.ll_grad(pool.members[open[r]], delta, fresh).transpose();
      }
      const Eigen::VectorXd gains = glister_gains(cand, v, options.eta);
      std::vector<std::size_t> order(open.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      const std::size_t take = std::min(block, pool.budget - count);
      std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                        [&](std::size_t a, std::size_t b) {
                          const double ga = gains(static_cast<Eigen::Index>(a));
                          const double gb = gains(static_cast<Eigen::Index>(b));
                          return ga != gb ? ga > gb : a < b;
                        });

      // One ascent step on the block's mean log-likelihood.
      Eigen::VectorXd step = Eigen::VectorXd::Zero(classes * width);
      for (std::size_t t = 0; t < take; ++t) {
        taken[open[order[t]]] = true;
        picked.push_back(pool.members[open[order[t]]]);
        step += cand.row(static_cast<Eigen::Index>(order[t])).transpose();
      }
      step *= options.eta / static_cast<double>(take);
      for (Eigen::Index c = 0; c < classes; ++c) delta.row(c) += step.segment(c * width, width).transpose();
      count += take;
      fresh = false;
    }
  }
  auto r = make_result("glister", artifact.labels.size(), std::move(picked), 0);
  r.params["eta"] = fmt::format("{}", options.eta);
  if (options.refresh > 0) r.params["refresh"] = std::to_string(options.refresh);
  return r;
}

}  // namespace coreset
