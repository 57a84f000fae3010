#include "coreset/trainer.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numbers>
#include <numeric>

#include "coreset/artifact.hpp"
#include "coreset/error.hpp"
#include "coreset/rng.hpp"

namespace coreset {

namespace {

Eigen::MatrixXd to_batch(const FloatMatrix& x, std::span<const Index> rows) {
  Eigen::MatrixXd b(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(x.cols));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto src = x.row(rows[r]);
    for (std::size_t j = 0; j < x.cols; ++j) b(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = src[j];
  }
  return b;
}

// Row-wise softmax of logits, stabilized by the row maximum.
Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd p = (logits.colwise() - logits.rowwise().maxCoeff()).array().exp().matrix();
  p.array().colwise() /= p.rowwise().sum().array();
  return p;
}

struct Forward {
  Eigen::MatrixXd pre_hidden;   // B x hidden (mlp1)
  Eigen::MatrixXd penultimate;  // B x h
  Eigen::MatrixXd logits;       // B x C
};

Forward forward(const ProxyModel& m, const Eigen::MatrixXd& xb) {
  Forward f;
  if (m.arch == Arch::mlp1) {
    f.pre_hidden = (xb * m.hidden_weight.transpose()).rowwise() + m.hidden_bias.transpose();
    f.penultimate = f.pre_hidden.cwiseMax(0.0);
  } else {
    f.penultimate = xb;
  }
  f.logits = (f.penultimate * m.out_weight.transpose()).rowwise() + m.out_bias.transpose();
  return f;
}

template <typename Matrix>
void append(std::vector<double>& out, const Matrix& m) {
  out.insert(out.end(), m.data(), m.data() + m.size());
}

template <typename Matrix>
std::size_t read_into(Matrix& m, std::span<const double> flat, std::size_t pos) {
  if (pos + static_cast<std::size_t>(m.size()) > flat.size()) throw ValidationError("parameter vector too short");
  std::copy(flat.begin() + static_cast<std::ptrdiff_t>(pos),
            flat.begin() + static_cast<std::ptrdiff_t>(pos + static_cast<std::size_t>(m.size())), m.data());
  return pos + static_cast<std::size_t>(m.size());
}

std::vector<double> normalized_weights(const std::optional<std::vector<float>>& weights, std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (!weights) return w;
  if (weights->size() != n) throw ValidationError(fmt::format("{} sample weights for {} samples", weights->size(), n));
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = (*weights)[i];
    if (!std::isfinite(v) || v < 0.0) throw ValidationError(fmt::format("sample weight {} is {}, expected >= 0", i, v));
    w[i] = v;
    total += v;
  }
  if (!(total > 0.0)) throw ValidationError("sample weights sum to zero");
  const double mean = total / static_cast<double>(n);
  for (double& v : w) v /= mean;
  return w;
}

}  // namespace

Arch parse_arch(const std::string& name) {
  if (name == "linear") return Arch::linear;
  if (name == "mlp1") return Arch::mlp1;
  throw ValidationError("unknown architecture '" + name + "'");
}

std::string to_string(Arch a) { return a == Arch::linear ? "linear" : "mlp1"; }

LrSchedule parse_lr_schedule(const std::string& name) {
  if (name == "constant") return LrSchedule::constant;
  if (name == "cosine") return LrSchedule::cosine;
  throw ValidationError("unknown lr schedule '" + name + "'");
}

std::string to_string(LrSchedule s) { return s == LrSchedule::constant ? "constant" : "cosine"; }

std::size_t ProxyModel::input_dim() const {
  return static_cast<std::size_t>(arch == Arch::mlp1 ? hidden_weight.cols() : out_weight.cols());
}

Eigen::VectorXd ProxyModel::penultimate(const Eigen::VectorXd& x) const {
  if (arch == Arch::linear) return x;
  return (hidden_weight * x + hidden_bias).cwiseMax(0.0);
}

Eigen::VectorXd ProxyModel::logits(const Eigen::VectorXd& x) const { return out_weight * penultimate(x) + out_bias; }

Eigen::MatrixXd ProxyModel::input_jacobian(const Eigen::VectorXd& x) const {
  if (arch == Arch::linear) return out_weight;
  const Eigen::VectorXd pre = hidden_weight * x + hidden_bias;
  const Eigen::VectorXd gate = (pre.array() > 0.0).cast<double>();
  return out_weight * gate.asDiagonal() * hidden_weight;
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ValidationError("epochs must be >= 1");
  if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw ValidationError("lr must be finite and >= 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ValidationError("momentum must be in [0, 1)");
  if (!(weight_decay >= 0.0)) throw ValidationError("weight_decay must be >= 0");
  if (hidden < 1) throw ValidationError("hidden width must be >= 1");
}

ProxyModel init_model(Arch arch, std::size_t input_dim, std::size_t num_classes, std::size_t hidden,
                      std::uint64_t seed) {
  CounterRng rng(seed, Stream::init);
  const auto uniform_fill = [&](auto& m, std::size_t fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = (2.0 * rng.uniform() - 1.0) * bound;
  };
  ProxyModel m;
  m.arch = arch;
  m.rng_seed = seed;
  const auto c = static_cast<Eigen::Index>(num_classes);
  std::size_t h = input_dim;
  if (arch == Arch::mlp1) {
    h = hidden;
    m.hidden_weight.resize(static_cast<Eigen::Index>(hidden), static_cast<Eigen::Index>(input_dim));
    m.hidden_bias.resize(static_cast<Eigen::Index>(hidden));
    uniform_fill(m.hidden_weight, input_dim);
    uniform_fill(m.hidden_bias, input_dim);
  }
  m.out_weight.resize(c, static_cast<Eigen::Index>(h));
  m.out_bias.resize(c);
  uniform_fill(m.out_weight, h);
  uniform_fill(m.out_bias, h);
  return m;
}

std::vector<double> flatten_parameters(const ProxyModel& m) {
  std::vector<double> out;
  if (m.arch == Arch::mlp1) {
    append(out, m.hidden_weight);
    append(out, m.hidden_bias);
  }
  append(out, m.out_weight);
  append(out, m.out_bias);
  return out;
}

void assign_parameters(ProxyModel& m, std::span<const double> flat) {
  std::size_t pos = 0;
  if (m.arch == Arch::mlp1) {
    pos = read_into(m.hidden_weight, flat, pos);
    pos = read_into(m.hidden_bias, flat, pos);
  }
  pos = read_into(m.out_weight, flat, pos);
  pos = read_into(m.out_bias, flat, pos);
  if (pos != flat.size()) throw ValidationError("parameter vector too long");
}

LossGradient loss_and_gradient(const ProxyModel& m, const FloatMatrix& x, const LabelVector& y,
                               std::span<const Index> rows, std::span<const double> weights) {
  if (!weights.empty() && weights.size() != rows.size()) throw ValidationError("batch weights misaligned");
  const Eigen::MatrixXd xb = to_batch(x, rows);
  const Forward f = forward(m, xb);
  const auto b = static_cast<Eigen::Index>(rows.size());
  const Eigen::VectorXd lse = f.logits.rowwise().maxCoeff() +
      (f.logits.colwise() - f.logits.rowwise().maxCoeff()).array().exp().rowwise().sum().log().matrix();
  Eigen::MatrixXd dlogits = softmax_rows(f.logits);
  LossGradient out;
  for (Eigen::Index r = 0; r < b; ++r) {
    const auto label = static_cast<Eigen::Index>(y.labels[rows[static_cast<std::size_t>(r)]]);
    const double w = weights.empty() ? 1.0 : weights[static_cast<std::size_t>(r)];
    out.loss += w * (lse(r) - f.logits(r, label));
    dlogits(r, label) -= 1.0;
    dlogits.row(r) *= w / static_cast<double>(b);
  }
  out.loss /= static_cast<double>(b);

  const Eigen::MatrixXd g_out_w = dlogits.transpose() * f.penultimate;
  const Eigen::VectorXd g_out_b = dlogits.colwise().sum().transpose();
  if (m.arch == Arch::mlp1) {
    const Eigen::MatrixXd dhidden =
        ((dlogits * m.out_weight).array() * (f.pre_hidden.array() > 0.0).cast<double>()).matrix();
    const Eigen::MatrixXd g_hid_w = dhidden.transpose() * xb;
    const Eigen::VectorXd g_hid_b = dhidden.colwise().sum().transpose();
    append(out.grad, g_hid_w);
    append(out.grad, g_hid_b);
  }
  append(out.grad, g_out_w);
  append(out.grad, g_out_b);
  return out;
}

ProxyModel train(Arch arch, const FeatureMatrix& x, const LabelVector& y, std::optional<std::vector<float>> weights,
                 const TrainConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  const std::size_t n = x.rows;
  if (n == 0) throw ValidationError("cannot train on an empty set");
  if (y.size() != n) throw ValidationError(fmt::format("{} labels for {} samples", y.size(), n));
  const auto w = normalized_weights(weights, n);

  ProxyModel model = init_model(arch, x.cols, static_cast<std::size_t>(y.num_classes), cfg.hidden, cfg.seed);
  std::vector<double> params = flatten_parameters(model);
  std::vector<double> velocity(params.size(), 0.0);
  CounterRng shuffle_rng(cfg.seed, Stream::shuffle);
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  std::vector<double> batch_w;

  const std::size_t batches = (n + cfg.batch_size - 1) / cfg.batch_size;
  const double total_steps = static_cast<double>(cfg.epochs * batches);
  std::size_t step = 0;
  if (on_epoch) on_epoch(0, model);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(std::span<Index>(order));
    for (std::size_t bi = 0; bi < batches; ++bi, ++step) {
      const std::size_t begin = bi * cfg.batch_size;
      const std::size_t end = std::min(n, begin + cfg.batch_size);
      const std::span<const Index> rows(order.data() + begin, end - begin);
      batch_w.resize(rows.size());
      for (std::size_t r = 0; r < rows.size(); ++r) batch_w[r] = w[rows[r]];
      const auto lg = loss_and_gradient(model, x, y, rows, batch_w);
      if (!std::isfinite(lg.loss)) {
        throw NumericalError(fmt::format("non-finite loss at epoch {} batch {} (lr {} too large?)", epoch + 1, bi, cfg.lr));
      }
      double lr = cfg.lr;
      if (cfg.lr_schedule == LrSchedule::cosine) {
        lr *= 0.5 * (1.0 + std::cos(std::numbers::pi * static_cast<double>(step) / total_steps));
      }
      for (std::size_t p = 0; p < params.size(); ++p) {
        const double g = lg.grad[p] + cfg.weight_decay * params[p];
        velocity[p] = cfg.momentum * velocity[p] + g;
        params[p] -= lr * velocity[p];
      }
      assign_parameters(model, params);
    }
    if (on_epoch) on_epoch(epoch + 1, model);
  }
  return model;
}

Eigen::MatrixXd predict_proba(const ProxyModel& m, const FeatureMatrix& x) {
  std::vector<Index> rows(x.rows);
  std::iota(rows.begin(), rows.end(), Index{0});
  return softmax_rows(forward(m, to_batch(x, rows)).logits);
}

double accuracy(const ProxyModel& m, const FeatureMatrix& x, const LabelVector& y) {
  if (x.rows == 0) return 0.0;
  const Eigen::MatrixXd p = predict_proba(m, x);
  std::size_t hits = 0;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    Eigen::Index arg = 0;
    p.row(i).maxCoeff(&arg);
    hits += arg == y.labels[static_cast<std::size_t>(i)] ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(x.rows);
}

TrainingTrace snapshot_trace(const ProxyModel& m, const FeatureMatrix& x, const LabelVector& y) {
  std::vector<Index> rows(x.rows);
  std::iota(rows.begin(), rows.end(), Index{0});
  const Forward f = forward(m, to_batch(x, rows));
  const Eigen::MatrixXd p = softmax_rows(f.logits);
  TrainingTrace t;
  t.softmax = FloatMatrix(x.rows, static_cast<std::size_t>(p.cols()));
  for (std::size_t i = 0; i < x.rows; ++i) {
    for (std::size_t c = 0; c < t.softmax.cols; ++c) {
      t.softmax(i, c) = static_cast<float>(p(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)));
    }
  }
  t.penultimate = FloatMatrix(x.rows, static_cast<std::size_t>(f.penultimate.cols()));
  for (std::size_t i = 0; i < x.rows; ++i) {
    for (std::size_t j = 0; j < t.penultimate.cols; ++j) {
      t.penultimate(i, j) = static_cast<float>(f.penultimate(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    }
  }
  fill_error_vectors(t, y);
  return t;
}

TraceRecording record_trace(Arch arch, const FeatureMatrix& x, const LabelVector& y, const TrainConfig& cfg,
                            int reference_epoch, const std::optional<ValidationSplit>& validation) {
  cfg.validate();
  if (reference_epoch < 0 || static_cast<std::size_t>(reference_epoch) > cfg.epochs) {
    throw ValidationError(fmt::format("reference epoch {} outside [0, {}]", reference_epoch, cfg.epochs));
  }
  const auto correctness_row = [](const ProxyModel& m, const FeatureMatrix& fx, const LabelVector& fy,
                                  std::vector<std::uint8_t>& out) {
    const Eigen::MatrixXd p = predict_proba(m, fx);
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
      Eigen::Index arg = 0;
      p.row(i).maxCoeff(&arg);
      out.push_back(arg == fy.labels[static_cast<std::size_t>(i)] ? 1 : 0);
    }
  };

  TraceRecording rec;
  std::vector<std::uint8_t> train_correct;
  std::vector<std::uint8_t> val_correct;
  train(arch, x, y, std::nullopt, cfg, [&](std::size_t epoch, const ProxyModel& m) {
    if (epoch > 0) {
      correctness_row(m, x, y, train_correct);
      if (validation) correctness_row(m, validation->features, validation->labels, val_correct);
    }
    if (epoch == static_cast<std::size_t>(reference_epoch)) {
      rec.train = snapshot_trace(m, x, y);
      if (validation) rec.validation = snapshot_trace(m, validation->features, validation->labels);
      rec.reference_model = m;
    }
  });
  rec.train.num_epochs = cfg.epochs;
  rec.train.reference_epoch = reference_epoch;
  rec.train.correctness = std::move(train_correct);
  if (rec.validation) {
    rec.validation->num_epochs = cfg.epochs;
    rec.validation->reference_epoch = reference_epoch;
    rec.validation->correctness = std::move(val_correct);
  }
  return rec;
}

double evaluate_coreset(const CoresetResult& coreset, const FeatureMatrix& train_x, const LabelVector& train_y,
                        const FeatureMatrix& test_x, const LabelVector& test_y, Arch arch, const TrainConfig& cfg) {
  if (coreset.indices.empty()) throw ValidationError("coreset is empty");
  if (coreset.weights.size() != coreset.indices.size()) throw ValidationError("coreset weights misaligned");
  for (Index i : coreset.indices) {
    if (i >= train_x.rows) throw ValidationError(fmt::format("coreset index {} outside the artifact (n = {})", i, train_x.rows));
  }
  const FeatureMatrix sub_x = [&] {
    FeatureMatrix out(coreset.indices.size(), train_x.cols);
    for (std::size_t r = 0; r < coreset.indices.size(); ++r) {
      const auto src = train_x.row(coreset.indices[r]);
      std::copy(src.begin(), src.end(), out.row(r).begin());
    }
    return out;
  }();
  LabelVector sub_y;
  sub_y.num_classes = train_y.num_classes;
  for (Index i : coreset.indices) sub_y.labels.push_back(train_y.labels[i]);
  const ProxyModel m = train(arch, sub_x, sub_y, coreset.weights, cfg);
  return accuracy(m, test_x, test_y);
}

}  // namespace coreset
