#include "coreset/experiment.hpp"

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <numeric>

#include "coreset/artifact.hpp"
#include "coreset/error.hpp"
#include "coreset/metrics.hpp"
#include "coreset/selection.hpp"
#include "json.hpp"

namespace coreset {

namespace {

LabelVector gather_labels(const LabelVector& y, std::span<const Index> rows) {
  LabelVector out;
  out.num_classes = y.num_classes;
  for (Index i : rows) out.labels.push_back(y.labels[i]);
  return out;
}

}  // namespace

DatasetArtifact build_trace_artifact(const LabeledSplit& data, Arch arch, const TrainConfig& cfg, int reference_epoch,
                                     double val_fraction) {
  DatasetArtifact a;
  std::optional<ValidationSplit> val;
  if (val_fraction > 0.0) {
    const auto [kept, held] = stratified_split(data.labels, val_fraction, cfg.seed);
    if (held.empty()) throw ValidationError(fmt::format("val fraction {} leaves the validation split empty", val_fraction));
    a.features = gather_rows(data.features, kept);
    a.labels = gather_labels(data.labels, kept);
    val = ValidationSplit{gather_rows(data.features, held), gather_labels(data.labels, held), {}};
  } else {
    a.features = data.features;
    a.labels = data.labels;
  }
  auto rec = record_trace(arch, a.features, a.labels, cfg, reference_epoch, val);
  a.trace = std::move(rec.train);
  if (val) {
    val->trace = std::move(*rec.validation);
    a.validation = std::move(val);
  }
  validate_artifact(a);
  return a;
}

std::pair<double, double> mean_std(std::span<const double> values) {
  if (values.empty()) return {0.0, 0.0};
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / n)};
}

std::string EvalReport::to_json() const {
  nlohmann::json j;
  j["method"] = method;
  j["fraction"] = fraction;
  j["size"] = size;
  j["repeats"] = accuracies.size();
  j["accuracies"] = accuracies;
  j["mean_acc"] = mean_acc;
  j["std_acc"] = std_acc;
  return j.dump(2) + "\n";
}

std::string EvalReport::summary() const {
  return fmt::format("{} @ {}: {:.2f} ± {:.2f} ({} runs, {} samples)", method, fraction, 100.0 * mean_acc,
                     100.0 * std_acc, accuracies.size(), size);
}

EvalReport evaluate_repeats(const DatasetArtifact& artifact, const CoresetResult& coreset, const LabeledSplit& test,
                            Arch arch, const TrainConfig& cfg, std::size_t repeats) {
  if (repeats < 1) throw ValidationError("repeats must be >= 1");
  if (test.features.cols != artifact.features.cols) {
    throw ValidationError(fmt::format("test split has {} features, artifact has {}", test.features.cols,
                                      artifact.features.cols));
  }
  EvalReport rep;
  rep.method = coreset.method;
  rep.fraction = coreset.fraction;
  rep.size = coreset.indices.size();
  for (std::size_t r = 0; r < repeats; ++r) {
    TrainConfig c = cfg;
    c.seed = cfg.seed + r;
    rep.accuracies.push_back(
        evaluate_coreset(coreset, artifact.features, artifact.labels, test.features, test.labels, arch, c));
  }
  std::tie(rep.mean_acc, rep.std_acc) = mean_std(rep.accuracies);
  return rep;
}

CoresetResult full_coreset(std::size_t n) {
  std::vector<Index> all(n);
  std::iota(all.begin(), all.end(), Index{0});
  return make_result("full", n, std::move(all), 0);
}

std::vector<SweepRow> run_sweep(const DatasetArtifact& artifact, const LabeledSplit& test, const SweepConfig& config) {
  if (config.methods.empty()) throw ValidationError("sweep needs at least one method");
  if (config.fractions.empty()) throw ValidationError("sweep needs at least one fraction");
  if (config.repeats < 1) throw ValidationError("repeats must be >= 1");
  std::vector<SweepRow> rows;
  for (const auto& method : config.methods) {
    for (double fraction : config.fractions) {
      const auto start = std::chrono::steady_clock::now();
      SweepRow row;
      row.method = method;
      row.fraction = fraction;
      row.repeats = config.repeats;
      row.upper_bound = budget_from_fraction(artifact.size(), fraction) == artifact.size();
      std::vector<double> acc;
      for (std::size_t r = 0; r < config.repeats; ++r) {
        MethodOptions o = config.selection;
        o.method = method;
        o.fraction = fraction;
        o.seed = config.selection.seed + r;
        const CoresetResult coreset = row.upper_bound ? full_coreset(artifact.size()) : run_method(artifact, o);
        TrainConfig c = config.train;
        c.seed = config.train.seed + r;
        acc.push_back(evaluate_coreset(coreset, artifact.features, artifact.labels, test.features, test.labels,
                                       config.arch, c));
      }
      std::tie(row.mean_acc, row.std_acc) = mean_std(acc);
      row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      rows.push_back(row);
    }
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "method,fraction,repeats,mean_acc,std_acc,seconds\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{:.6f},{:.6f},{:.3f}\n", r.method, r.fraction, r.repeats, r.mean_acc, r.std_acc,
                       r.seconds);
  }
  return out;
}

std::string sweep_table(const std::vector<SweepRow>& rows) {
  std::string out = fmt::format("{:<12} {:>8} {:>16} {:>9}\n", "method", "fraction", "accuracy (%)", "seconds");
  for (const auto& r : rows) {
    const auto acc = fmt::format("{:.2f} ± {:.2f}", 100.0 * r.mean_acc, 100.0 * r.std_acc);
    // "±" is two bytes in UTF-8; widen the field so columns stay aligned.
    out += fmt::format("{:<12} {:>8} {:>17} {:>9.2f}{}\n", r.method, r.fraction, acc, r.seconds,
                       r.upper_bound ? "  (full data, shared upper bound)" : "");
  }
  return out;
}

}  // namespace coreset
