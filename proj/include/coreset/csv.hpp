#pragma once

#include <filesystem>

#include "coreset/synthetic.hpp"

namespace coreset {

/// Numeric CSV with the integer class label in the last column. A first line
/// that does not parse as numbers is treated as a header. The class count is
/// max(label) + 1, raised to at least `min_classes` (and never below 2).
LabeledSplit read_labeled_csv(const std::filesystem::path& path, int min_classes = 2);

}  // namespace coreset
