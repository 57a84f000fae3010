#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "coreset/types.hpp"

namespace coreset {

inline constexpr int kSchemaVersion = 1;

// Tolerances used by trace validation.
inline constexpr double kSoftmaxSumTolerance = 1e-4;
inline constexpr double kErrorVectorTolerance = 1e-6;

/// Checks every artifact invariant and throws ValidationError naming the
/// offending file and field. `prefix` is "" for the training split and
/// "val_" for the validation split.
void validate_split(const FeatureMatrix& features, const LabelVector& labels,
                    const std::optional<TrainingTrace>& trace, const std::string& prefix = "");
void validate_artifact(const DatasetArtifact& artifact);

/// Reads `manifest.json` plus the DCTF tensors it lists and validates them.
DatasetArtifact load_artifact(const std::filesystem::path& dir);

/// Validates, then writes the manifest and tensors. Creates `dir` if needed.
void save_artifact(const DatasetArtifact& artifact, const std::filesystem::path& dir);

/// k = round(fraction * n) clamped to [1, n].
std::size_t budget_from_fraction(std::size_t n, double fraction);

/// Builds a trace snapshot's derived fields consistently: error vectors are
/// softmax minus one-hot and losses are the floored negative log-likelihood.
void fill_error_vectors(TrainingTrace& trace, const LabelVector& labels);

}  // namespace coreset
