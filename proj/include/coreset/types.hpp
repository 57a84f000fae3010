#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace coreset {

using Index = std::size_t;
using Metadata = std::map<std::string, std::string>;

/// Dense row-major float32 matrix. Used for features, softmax outputs,
/// error vectors and penultimate activations; arithmetic on it is done in
/// double by the consumers.
struct FloatMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> data;

  FloatMatrix() = default;
  FloatMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0f) {}
  FloatMatrix(std::size_t r, std::size_t c, std::vector<float> values) : rows(r), cols(c), data(std::move(values)) {}

  std::span<const float> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
  std::span<float> row(std::size_t i) { return {data.data() + i * cols, cols}; }
  float operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
  float& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }

  bool operator==(const FloatMatrix&) const = default;
};

/// Per-sample embeddings (n x d): the space geometric and submodular methods work in.
using FeatureMatrix = FloatMatrix;

struct LabelVector {
  std::vector<std::int32_t> labels;
  int num_classes = 0;

  std::size_t size() const { return labels.size(); }
  bool operator==(const LabelVector&) const = default;
};

/// Outputs of a (proxy) model recorded during training. `correctness` is kept
/// for every epoch; everything else is a snapshot at `reference_epoch`.
struct TrainingTrace {
  std::size_t num_epochs = 0;           // E
  int reference_epoch = 0;
  std::vector<std::uint8_t> correctness;  // E x n, epoch-major
  FloatMatrix softmax;                  // n x C
  std::vector<float> losses;            // n
  FloatMatrix error_vectors;            // n x C, softmax - onehot(label)
  FloatMatrix penultimate;              // n x h

  std::size_t num_samples() const { return softmax.rows; }
  bool correct(std::size_t epoch, std::size_t sample) const {
    return correctness[epoch * num_samples() + sample] != 0;
  }
  bool operator==(const TrainingTrace&) const = default;
};

struct ValidationSplit {
  FeatureMatrix features;
  LabelVector labels;
  TrainingTrace trace;

  bool operator==(const ValidationSplit&) const = default;
};

struct DatasetArtifact {
  FeatureMatrix features;
  LabelVector labels;
  std::optional<TrainingTrace> trace;
  std::optional<ValidationSplit> validation;

  std::size_t size() const { return features.rows; }
  bool operator==(const DatasetArtifact&) const = default;
};

struct ScoreVector {
  std::vector<double> scores;
  bool higher_is_better = true;
  std::string method;
  Metadata metadata;
};

struct CoresetResult {
  std::vector<Index> indices;  // sorted, unique
  std::vector<float> weights;  // aligned with indices
  std::string method;
  double fraction = 1.0;
  std::uint64_t seed = 0;
  Metadata params;
  Metadata metadata;

  bool operator==(const CoresetResult&) const = default;
};

}  // namespace coreset
