#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "coreset/types.hpp"

namespace coreset {

// Uncertainty scores over the reference-epoch softmax. Higher = less certain.
ScoreVector least_confidence(const TrainingTrace& trace);
ScoreVector entropy_score(const TrainingTrace& trace);  // natural log, 0 ln 0 = 0
ScoreVector margin_score(const TrainingTrace& trace);   // 1 - (top1 - top2)

/// Number of correct -> incorrect transitions between consecutive epochs.
/// Samples never classified correctly score E so they outrank every
/// forgettable sample. Needs E >= 2.
ScoreVector forgetting_count(const TrainingTrace& trace);

/// ||softmax - onehot||_2, read from the stored error vectors.
ScoreVector el2n_score(const TrainingTrace& trace);

/// Frobenius norm of the last linear layer's per-sample gradient:
/// ||p - y|| * sqrt(||f||^2 + bias).
ScoreVector grand_score(const TrainingTrace& trace, bool include_bias);

/// p_i = loss_i / sum(loss). Throws NumericalError when every loss is zero.
std::vector<double> sensitivity_probabilities(const TrainingTrace& trace);

/// Element-wise mean over independent runs. All inputs must agree on length
/// and orientation.
ScoreVector average_scores(std::span<const ScoreVector> runs);

/// Top-k by score (per class when balanced); ties go to the lower index.
CoresetResult select_by_score(const ScoreVector& s, const LabelVector& labels, std::size_t k, bool balanced,
                              std::uint64_t seed);

/// k draws without replacement proportional to sensitivity, renormalizing
/// after each draw. Falls back to uniform over the remainder once the
/// positive mass is exhausted (recorded in metadata).
CoresetResult importance_sample(const TrainingTrace& trace, const LabelVector& labels, std::size_t k, bool balanced,
                                std::uint64_t seed);

}  // namespace coreset
