#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include "coreset/types.hpp"

namespace testing {

using coreset::FloatMatrix;
using coreset::LabelVector;
using coreset::TrainingTrace;

inline FloatMatrix matrix(std::size_t rows, std::size_t cols, std::vector<float> values) {
  return FloatMatrix(rows, cols, std::move(values));
}

inline LabelVector labels(std::vector<std::int32_t> y, int classes) { return LabelVector{std::move(y), classes}; }

inline FloatMatrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols, double lo = -1.0,
                                 double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  FloatMatrix m(rows, cols);
  for (auto& v : m.data) v = static_cast<float>(u(rng));
  return m;
}

inline FloatMatrix random_softmax(std::mt19937_64& rng, std::size_t rows, std::size_t classes) {
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  FloatMatrix m(rows, classes);
  for (std::size_t i = 0; i < rows; ++i) {
    std::vector<double> z(classes);
    double total = 0.0;
    for (auto& v : z) total += (v = std::exp(u(rng)));
    for (std::size_t c = 0; c < classes; ++c) m(i, c) = static_cast<float>(z[c] / total);
  }
  return m;
}

inline LabelVector random_labels(std::mt19937_64& rng, std::size_t n, int classes) {
  LabelVector y;
  y.num_classes = classes;
  for (std::size_t i = 0; i < n; ++i) y.labels.push_back(static_cast<std::int32_t>(i < static_cast<std::size_t>(classes) ? i : rng() % classes));
  return y;
}

/// Trace with consistent error vectors and losses; correctness is random with E epochs.
inline TrainingTrace random_trace(std::mt19937_64& rng, const LabelVector& y, std::size_t hidden, std::size_t epochs) {
  const std::size_t n = y.size();
  const auto classes = static_cast<std::size_t>(y.num_classes);
  TrainingTrace t;
  t.num_epochs = epochs;
  t.reference_epoch = static_cast<int>(epochs / 2);
  t.softmax = random_softmax(rng, n, classes);
  t.penultimate = random_matrix(rng, n, hidden, -2.0, 2.0);
  t.error_vectors = FloatMatrix(n, classes);
  t.losses.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < classes; ++c) {
      t.error_vectors(i, c) = t.softmax(i, c) - (static_cast<std::int32_t>(c) == y.labels[i] ? 1.0f : 0.0f);
    }
    t.losses[i] = static_cast<float>(-std::log(std::max(static_cast<double>(t.softmax(i, static_cast<std::size_t>(y.labels[i]))), 1e-12)));
  }
  for (std::size_t e = 0; e < epochs * n; ++e) t.correctness.push_back(static_cast<std::uint8_t>(rng() % 2));
  return t;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("coreset_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::vector<char> file_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace testing
