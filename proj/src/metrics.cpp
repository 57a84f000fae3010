#include "coreset/metrics.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "coreset/error.hpp"

namespace coreset {

namespace {

double squared_norm(std::span<const float> a) {
  double s = 0.0;
  for (float v : a) s += static_cast<double>(v) * v;
  return s;
}

double dot(std::span<const float> a, std::span<const float> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * b[i];
  return s;
}

double euclidean(std::span<const float> a, std::span<const float> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = static_cast<double>(a[i]) - b[i];
    s += diff * diff;
  }
  return std::sqrt(s);
}

std::vector<double> row_norms(const FloatMatrix& m, const char* what) {
  std::vector<double> norms(m.rows);
  for (std::size_t i = 0; i < m.rows; ++i) {
    norms[i] = std::sqrt(squared_norm(m.row(i)));
    if (norms[i] == 0.0) throw ValidationError(fmt::format("{} row {} has zero norm; cosine is undefined", what, i));
  }
  return norms;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  if (v.size() % 2 == 1) return v[mid];
  const double hi = v[mid];
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

class DenseKernel final : public SimilarityKernel {
 public:
  explicit DenseKernel(SimilarityMatrix sim) : sim_(std::move(sim)) {}
  std::size_t size() const override { return static_cast<std::size_t>(sim_.values.rows()); }
  double at(std::size_t i, std::size_t j) const override {
    return sim_.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  void column(std::size_t j, std::span<double> out) const override {
    const auto col = sim_.values.col(static_cast<Eigen::Index>(j));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = col(static_cast<Eigen::Index>(i));
  }

 private:
  SimilarityMatrix sim_;
};

class CosineShiftedKernel final : public SimilarityKernel {
 public:
  explicit CosineShiftedKernel(const FloatMatrix& f) : f_(f), norms_(row_norms(f, "features")) {}
  std::size_t size() const override { return f_.rows; }
  double at(std::size_t i, std::size_t j) const override {
    if (i == j) return 1.0;
    const double c = dot(f_.row(i), f_.row(j)) / (norms_[i] * norms_[j]);
    return std::clamp(0.5 * (1.0 + c), 0.0, 1.0);
  }

 private:
  FloatMatrix f_;
  std::vector<double> norms_;
};

class NegEuclideanKernel final : public SimilarityKernel {
 public:
  explicit NegEuclideanKernel(const FloatMatrix& f) : f_(f) {
    for (std::size_t i = 0; i < f_.rows; ++i) {
      for (std::size_t j = i + 1; j < f_.rows; ++j) max_dist_ = std::max(max_dist_, euclidean(f_.row(i), f_.row(j)));
    }
  }
  std::size_t size() const override { return f_.rows; }
  double at(std::size_t i, std::size_t j) const override {
    return i == j ? max_dist_ : max_dist_ - euclidean(f_.row(i), f_.row(j));
  }

 private:
  FloatMatrix f_;
  double max_dist_ = 0.0;
};

}  // namespace

DistanceMetric parse_distance_metric(const std::string& name) {
  if (name == "euclidean") return DistanceMetric::euclidean;
  if (name == "cosine") return DistanceMetric::cosine;
  if (name == "sym_kl") return DistanceMetric::sym_kl;
  throw ValidationError("unknown distance metric '" + name + "'");
}

SimilarityKind parse_similarity_kind(const std::string& name) {
  if (name == "cosine_shifted") return SimilarityKind::cosine_shifted;
  if (name == "rbf") return SimilarityKind::rbf;
  if (name == "neg_euclidean_shifted") return SimilarityKind::neg_euclidean_shifted;
  throw ValidationError("unknown similarity kind '" + name + "'");
}

std::string to_string(DistanceMetric m) {
  switch (m) {
    case DistanceMetric::euclidean: return "euclidean";
    case DistanceMetric::cosine: return "cosine";
    case DistanceMetric::sym_kl: return "sym_kl";
  }
  return "?";
}

std::string to_string(SimilarityKind k) {
  switch (k) {
    case SimilarityKind::cosine_shifted: return "cosine_shifted";
    case SimilarityKind::rbf: return "rbf";
    case SimilarityKind::neg_euclidean_shifted: return "neg_euclidean_shifted";
  }
  return "?";
}

double kl_divergence(std::span<const float> p, std::span<const float> q) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double a = std::max(static_cast<double>(p[i]), kProbabilityFloor);
    const double b = std::max(static_cast<double>(q[i]), kProbabilityFloor);
    s += a * std::log(a / b);
  }
  return s;
}

double distance(std::span<const float> a, std::span<const float> b, DistanceMetric metric) {
  if (a.size() != b.size()) throw ValidationError("distance between rows of different dimension");
  switch (metric) {
    case DistanceMetric::euclidean:
      return euclidean(a, b);
    case DistanceMetric::cosine: {
      const double na = std::sqrt(squared_norm(a));
      const double nb = std::sqrt(squared_norm(b));
      if (na == 0.0 || nb == 0.0) throw ValidationError("cosine distance of a zero-norm row");
      return std::max(0.0, 1.0 - dot(a, b) / (na * nb));
    }
    case DistanceMetric::sym_kl:
      return std::max(0.0, kl_divergence(a, b) + kl_divergence(b, a));
  }
  return 0.0;
}

void check_probability_rows(const FloatMatrix& m, const std::string& what) {
  for (std::size_t i = 0; i < m.rows; ++i) {
    double sum = 0.0;
    for (float v : m.row(i)) {
      if (!(v >= 0.0f)) throw ValidationError(fmt::format("{} row {} is not a probability vector", what, i));
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-4) {
      throw ValidationError(fmt::format("{} row {} sums to {:.6g}, not a probability vector", what, i, sum));
    }
  }
}

DistanceMatrix pairwise_distance(const FloatMatrix& a, const FloatMatrix& b, DistanceMetric metric) {
  if (a.cols != b.cols) {
    throw ValidationError(fmt::format("dimension mismatch: {} vs {} columns", a.cols, b.cols));
  }
  DistanceMatrix out{Eigen::MatrixXd(static_cast<Eigen::Index>(a.rows), static_cast<Eigen::Index>(b.rows)), metric};
  if (metric == DistanceMetric::sym_kl) {
    check_probability_rows(a, "first operand");
    check_probability_rows(b, "second operand");
  }
  if (metric == DistanceMetric::cosine) {
    const auto na = row_norms(a, "first operand");
    const auto nb = row_norms(b, "second operand");
    for (std::size_t i = 0; i < a.rows; ++i) {
      for (std::size_t j = 0; j < b.rows; ++j) {
        out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            std::max(0.0, 1.0 - dot(a.row(i), b.row(j)) / (na[i] * nb[j]));
      }
    }
    return out;
  }
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t j = 0; j < b.rows; ++j) {
      out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = distance(a.row(i), b.row(j), metric);
    }
  }
  return out;
}

SimilarityMatrix similarity_from_features(const FloatMatrix& a, SimilarityKind kind) {
  if (a.rows < 1) throw ValidationError("similarity of an empty feature matrix");
  const auto n = static_cast<Eigen::Index>(a.rows);
  SimilarityMatrix out{Eigen::MatrixXd(n, n), kind};
  auto& s = out.values;
  switch (kind) {
    case SimilarityKind::cosine_shifted: {
      CosineShiftedKernel k(a);
      for (Eigen::Index i = 0; i < n; ++i) {
        s(i, i) = 1.0;
        for (Eigen::Index j = i + 1; j < n; ++j) s(i, j) = s(j, i) = k.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      }
      break;
    }
    case SimilarityKind::rbf: {
      std::vector<double> upper;
      upper.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
      Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
          d(i, j) = d(j, i) = euclidean(a.row(static_cast<std::size_t>(i)), a.row(static_cast<std::size_t>(j)));
          upper.push_back(d(i, j));
        }
      }
      double sigma = median(std::move(upper));
      if (sigma == 0.0) sigma = 1.0;  // all points coincide (or n = 1)
      s = (-d.array().square() / (2.0 * sigma * sigma)).exp().matrix();
      break;
    }
    case SimilarityKind::neg_euclidean_shifted: {
      Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
          d(i, j) = d(j, i) = euclidean(a.row(static_cast<std::size_t>(i)), a.row(static_cast<std::size_t>(j)));
        }
      }
      s = (d.maxCoeff() - d.array()).matrix();
      break;
    }
  }
  return out;
}

FloatMatrix gather_rows(const FloatMatrix& m, std::span<const Index> rows) {
  FloatMatrix out(rows.size(), m.cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto src = m.row(rows[r]);
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return out;
}

void SimilarityKernel::column(std::size_t j, std::span<double> out) const {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = at(i, j);
}

std::shared_ptr<const SimilarityKernel> make_dense_kernel(SimilarityMatrix sim) {
  return std::make_shared<DenseKernel>(std::move(sim));
}

std::shared_ptr<const SimilarityKernel> make_similarity_kernel(const FloatMatrix& features, SimilarityKind kind,
                                                               std::size_t cap) {
  if (features.rows <= cap) return make_dense_kernel(similarity_from_features(features, kind));
  switch (kind) {
    case SimilarityKind::cosine_shifted: return std::make_shared<CosineShiftedKernel>(features);
    case SimilarityKind::neg_euclidean_shifted: return std::make_shared<NegEuclideanKernel>(features);
    case SimilarityKind::rbf: break;
  }
  throw ValidationError(fmt::format("rbf similarity needs the full distance matrix; {} rows exceed the cap of {}",
                                    features.rows, cap));
}

}  // namespace coreset
