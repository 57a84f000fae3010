#pragma once

#include <string>
#include <vector>

#include "coreset/methods.hpp"
#include "coreset/synthetic.hpp"
#include "coreset/trainer.hpp"
#include "coreset/types.hpp"

namespace coreset {

/// Trains a proxy on `data` and packages features, labels and the recorded
/// trace. With val_fraction > 0 a stratified hold-out (seeded by cfg.seed)
/// becomes the validation split and is traced by the same run.
DatasetArtifact build_trace_artifact(const LabeledSplit& data, Arch arch, const TrainConfig& cfg, int reference_epoch,
                                     double val_fraction = 0.0);

/// Mean and population standard deviation (denominator = count).
std::pair<double, double> mean_std(std::span<const double> values);

struct EvalReport {
  std::string method;
  double fraction = 0.0;
  std::size_t size = 0;
  std::vector<double> accuracies;  // one per repeat
  double mean_acc = 0.0;
  double std_acc = 0.0;

  std::string to_json() const;
  std::string summary() const;
};

/// Repeat r trains with seed cfg.seed + r.
EvalReport evaluate_repeats(const DatasetArtifact& artifact, const CoresetResult& coreset, const LabeledSplit& test,
                            Arch arch, const TrainConfig& cfg, std::size_t repeats);

/// All indices, unit weights: the shared full-data upper bound.
CoresetResult full_coreset(std::size_t n);

struct SweepRow {
  std::string method;
  double fraction = 0.0;
  std::size_t repeats = 0;
  double mean_acc = 0.0;
  double std_acc = 0.0;
  double seconds = 0.0;
  bool upper_bound = false;  // fraction 1.0: every method trains on the full set
};

struct SweepConfig {
  std::vector<std::string> methods;
  std::vector<double> fractions;
  std::size_t repeats = 3;
  MethodOptions selection;  // method / fraction / seed are overwritten per cell
  Arch arch = Arch::mlp1;
  TrainConfig train;
};

/// Repeat r of every cell selects with seed selection.seed + r and trains
/// with seed train.seed + r, so rows share a seed set.
std::vector<SweepRow> run_sweep(const DatasetArtifact& artifact, const LabeledSplit& test, const SweepConfig& config);

std::string sweep_csv(const std::vector<SweepRow>& rows);
std::string sweep_table(const std::vector<SweepRow>& rows);

}  // namespace coreset
