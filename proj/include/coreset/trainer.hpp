#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "coreset/types.hpp"

namespace coreset {

enum class Arch { linear, mlp1 };
enum class LrSchedule { constant, cosine };

Arch parse_arch(const std::string& name);
std::string to_string(Arch a);
LrSchedule parse_lr_schedule(const std::string& name);
std::string to_string(LrSchedule s);

/// Multinomial logistic regression (`linear`) or one ReLU hidden layer
/// (`mlp1`). The final linear layer is always out_weight / out_bias; its input
/// is the "penultimate" representation (raw features for `linear`).
struct ProxyModel {
  Arch arch = Arch::mlp1;
  Eigen::MatrixXd hidden_weight;  // hidden x d (mlp1 only)
  Eigen::VectorXd hidden_bias;    // hidden      (mlp1 only)
  Eigen::MatrixXd out_weight;     // C x h
  Eigen::VectorXd out_bias;       // C
  std::uint64_t rng_seed = 0;

  std::size_t input_dim() const;
  std::size_t num_classes() const { return static_cast<std::size_t>(out_weight.rows()); }

  Eigen::VectorXd penultimate(const Eigen::VectorXd& x) const;
  Eigen::VectorXd logits(const Eigen::VectorXd& x) const;

  /// d logit_c / d x for every class, one row per class (C x d).
  Eigen::MatrixXd input_jacobian(const Eigen::VectorXd& x) const;
};

struct TrainConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 32;
  double lr = 0.1;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  std::uint64_t seed = 0;
  LrSchedule lr_schedule = LrSchedule::cosine;
  std::size_t hidden = 32;

  void validate() const;
};

ProxyModel init_model(Arch arch, std::size_t input_dim, std::size_t num_classes, std::size_t hidden,
                      std::uint64_t seed);

/// Flat parameter vector: hidden_weight, hidden_bias (mlp1), out_weight,
/// out_bias, each column-major.
std::vector<double> flatten_parameters(const ProxyModel& m);
void assign_parameters(ProxyModel& m, std::span<const double> flat);

struct LossGradient {
  double loss = 0.0;
  std::vector<double> grad;  // same layout as flatten_parameters
};

/// Weighted mean cross-entropy over `rows` and its gradient. `weights` is
/// either empty (all ones) or aligned with `rows`. No weight decay.
LossGradient loss_and_gradient(const ProxyModel& m, const FloatMatrix& x, const LabelVector& y,
                               std::span<const Index> rows, std::span<const double> weights = {});

using EpochCallback = std::function<void(std::size_t epoch, const ProxyModel&)>;

/// Mini-batch SGD with momentum and weight decay on weighted cross-entropy.
/// Weights (if given) are rescaled to mean 1. `on_epoch` fires with epoch 0
/// before training and after every completed epoch.
ProxyModel train(Arch arch, const FeatureMatrix& x, const LabelVector& y, std::optional<std::vector<float>> weights,
                 const TrainConfig& cfg, const EpochCallback& on_epoch = {});

Eigen::MatrixXd predict_proba(const ProxyModel& m, const FeatureMatrix& x);
double accuracy(const ProxyModel& m, const FeatureMatrix& x, const LabelVector& y);

/// Softmax, losses, error vectors and penultimate features of `m` on a split,
/// with an empty correctness history.
TrainingTrace snapshot_trace(const ProxyModel& m, const FeatureMatrix& x, const LabelVector& y);

struct TraceRecording {
  TrainingTrace train;
  std::optional<TrainingTrace> validation;
  ProxyModel reference_model;
};

/// Trains on the full split while logging per-epoch correctness (for the
/// validation split too, if given) and snapshots at `reference_epoch`.
TraceRecording record_trace(Arch arch, const FeatureMatrix& x, const LabelVector& y, const TrainConfig& cfg,
                            int reference_epoch, const std::optional<ValidationSplit>& validation = std::nullopt);

/// Trains a fresh model on the coreset (weights rescaled to mean 1) and
/// returns accuracy on the test split.
double evaluate_coreset(const CoresetResult& coreset, const FeatureMatrix& train_x, const LabelVector& train_y,
                        const FeatureMatrix& test_x, const LabelVector& test_y, Arch arch, const TrainConfig& cfg);

}  // namespace coreset
