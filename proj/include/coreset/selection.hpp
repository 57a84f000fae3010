#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "coreset/types.hpp"

namespace coreset {

/// A selection pool: either the whole dataset or the members of one class.
struct Pool {
  std::vector<Index> members;  // ascending dataset indices
  std::size_t budget = 0;
  int label = -1;  // -1 when the pool spans all classes
};

/// quota(c) = k div C, plus one for the (k mod C) lowest-numbered classes.
std::vector<std::size_t> class_quotas(std::size_t k, int num_classes);

/// Splits the dataset into pools. Balanced mode makes one pool per class with
/// the quota above and throws if a class is smaller than its quota.
std::vector<Pool> make_pools(const LabelVector& labels, std::size_t k, bool balanced);

/// Sorts picks by dataset index (weights follow) and fills the bookkeeping
/// fields. Throws if an index repeats.
CoresetResult make_result(std::string method, std::size_t n, std::vector<Index> indices, std::vector<float> weights,
                          std::uint64_t seed);

/// Uniform weights of 1.0.
CoresetResult make_result(std::string method, std::size_t n, std::vector<Index> indices, std::uint64_t seed);

/// Random baseline: uniform draws without replacement, per class when balanced.
/// Per-class random hold-out: round(fraction * class size) members of each
/// class (at most size - 1) go to the second list. Both lists are ascending.
std::pair<std::vector<Index>, std::vector<Index>> stratified_split(const LabelVector& labels, double fraction,
                                                                   std::uint64_t seed);

CoresetResult random_select(const LabelVector& labels, std::size_t k, bool balanced, std::uint64_t seed);

}  // namespace coreset
