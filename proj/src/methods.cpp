#include "coreset/methods.hpp"

#include <fmt/format.h>

#include <algorithm>

#include "coreset/artifact.hpp"
#include "coreset/boundary.hpp"
#include "coreset/error.hpp"
#include "coreset/geometry.hpp"
#include "coreset/scores.hpp"
#include "coreset/selection.hpp"
#include "coreset/submodular.hpp"

namespace coreset {

namespace {

const TrainingTrace& need_trace(const DatasetArtifact& a, const std::string& method, const char* field) {
  if (!a.trace) {
    throw CapabilityError(fmt::format("method '{}' needs {} but the artifact has no training trace", method, field));
  }
  return *a.trace;
}

ProxyModel train_proxy(const DatasetArtifact& a, const MethodOptions& o) {
  TrainConfig cfg = o.proxy;
  cfg.epochs = o.proxy_epochs > 0 ? o.proxy_epochs
               : a.trace      ? static_cast<std::size_t>(std::max(1, a.trace->reference_epoch))
                              : 20;
  return train(o.proxy_arch, a.features, a.labels, std::nullopt, cfg);
}

}  // namespace

const std::vector<std::string>& method_names() {
  static const std::vector<std::string> names = {
      "random", "herding", "kcenter", "cd",   "lc",        "entropy", "margin", "forgetting", "grand",
      "el2n",   "importance", "cal",  "deepfool", "craig", "gradmatch", "glister", "fl",       "gc"};
  return names;
}

bool is_score_method(const std::string& m) {
  return m == "lc" || m == "entropy" || m == "margin" || m == "forgetting" || m == "grand" || m == "el2n" ||
         m == "cal" || m == "deepfool";
}

ScoreVector compute_scores(const DatasetArtifact& a, const MethodOptions& o) {
  const auto& m = o.method;
  if (m == "lc") return least_confidence(need_trace(a, m, "softmax.dctf"));
  if (m == "entropy") return entropy_score(need_trace(a, m, "softmax.dctf"));
  if (m == "margin") return margin_score(need_trace(a, m, "softmax.dctf"));
  if (m == "forgetting") return forgetting_count(need_trace(a, m, "correctness.dctf"));
  if (m == "el2n") return el2n_score(need_trace(a, m, "error_vectors.dctf"));
  if (m == "grand") return grand_score(need_trace(a, m, "error_vectors.dctf and penultimate.dctf"), o.grand_bias);
  if (m == "cal") return cal_scores(a.features, need_trace(a, m, "softmax.dctf"), o.knn);
  if (m == "deepfool") {
    const ProxyModel model = train_proxy(a, o);
    ScoreVector s = model.arch == Arch::linear
                        ? deepfool_margin_linear(model.out_weight, model.out_bias, a.features)
                        : deepfool_iterative(&model, a.features);
    s.metadata["proxy"] = to_string(model.arch);
    return s;
  }
  throw ValidationError(fmt::format("'{}' is not a score-based method", m));
}

CoresetResult run_method(const DatasetArtifact& a, const MethodOptions& o, std::span<const DatasetArtifact> runs) {
  const auto& m = o.method;
  if (std::find(method_names().begin(), method_names().end(), m) == method_names().end()) {
    throw ValidationError(fmt::format("unknown method '{}'", m));
  }
  const std::size_t k = budget_from_fraction(a.size(), o.fraction);

  if (is_score_method(m)) {
    ScoreVector s;
    if (runs.size() > 1) {
      std::vector<ScoreVector> all;
      for (const auto& run : runs) {
        if (!(run.labels == a.labels)) throw ValidationError("--runs artifacts must share the same labels");
        all.push_back(compute_scores(run, o));
      }
      s = average_scores(all);
    } else {
      s = compute_scores(runs.empty() ? a : runs.front(), o);
    }
    return select_by_score(s, a.labels, k, o.balanced, o.seed);
  }
  if (runs.size() > 1) throw ValidationError(fmt::format("--runs averaging applies to score methods, not '{}'", m));

  if (m == "random") return random_select(a.labels, k, o.balanced, o.seed);
  if (m == "herding") return herding(a.features, a.labels, k, o.balanced);
  if (m == "kcenter") return k_center_greedy(a.features, a.labels, k, o.balanced, o.seed, o.metric);
  if (m == "cd") return contextual_diversity(need_trace(a, m, "softmax.dctf"), a.labels, k, o.balanced, o.seed);
  if (m == "importance") return importance_sample(need_trace(a, m, "losses.dctf"), a.labels, k, o.balanced, o.seed);
  if (m == "craig" || m == "gradmatch") {
    const auto& tr = need_trace(a, m, o.grad_space == GradientSpace::error_vector
                                          ? "error_vectors.dctf"
                                          : "error_vectors.dctf and penultimate.dctf");
    const GradientSet gs = build_gradient_set(tr, o.grad_space);
    CoresetResult r = m == "craig" ? craig_select(gs, a.labels, k, o.balanced)
                                   : omp_gradmatch(gs, a.labels, k, o.balanced, {o.lambda.value_or(1.0), true});
    r.params["grad_space"] = to_string(o.grad_space);
    return r;
  }
  if (m == "glister") {
    need_trace(a, m, "softmax.dctf and penultimate.dctf");
    if (!a.validation) {
      throw CapabilityError("method 'glister' needs a validation split (val_* tensors) but the artifact has none");
    }
    return glister_select(a, k, o.balanced, {o.eta, o.refresh});
  }
  // fl / gc
  SubmodularOptions so;
  so.kind = parse_objective_kind(m);
  so.lambda = o.lambda.value_or(0.5);
  so.similarity = o.similarity;
  return submodular_select(a.features, a.labels, k, o.balanced, so);
}

}  // namespace coreset
