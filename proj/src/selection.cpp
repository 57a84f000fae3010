#include "coreset/selection.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "coreset/error.hpp"
#include "coreset/rng.hpp"

namespace coreset {

std::vector<std::size_t> class_quotas(std::size_t k, int num_classes) {
  if (num_classes < 1) throw ValidationError("num_classes must be positive");
  const auto classes = static_cast<std::size_t>(num_classes);
  std::vector<std::size_t> quota(classes, k / classes);
  for (std::size_t c = 0; c < k % classes; ++c) ++quota[c];
  return quota;
}

std::vector<Pool> make_pools(const LabelVector& labels, std::size_t k, bool balanced) {
  const std::size_t n = labels.size();
  if (k > n) throw ValidationError(fmt::format("budget k = {} exceeds n = {}", k, n));
  if (!balanced) {
    Pool all;
    all.members.resize(n);
    std::iota(all.members.begin(), all.members.end(), Index{0});
    all.budget = k;
    return {std::move(all)};
  }
  const auto quota = class_quotas(k, labels.num_classes);
  std::vector<Pool> pools(quota.size());
  for (std::size_t c = 0; c < pools.size(); ++c) {
    pools[c].label = static_cast<int>(c);
    pools[c].budget = quota[c];
  }
  for (Index i = 0; i < n; ++i) pools[static_cast<std::size_t>(labels.labels[i])].members.push_back(i);
  for (const auto& p : pools) {
    if (p.members.size() < p.budget) {
      throw ValidationError(fmt::format("class {} has {} samples but its balanced quota is {}", p.label,
                                        p.members.size(), p.budget));
    }
  }
  return pools;
}

CoresetResult make_result(std::string method, std::size_t n, std::vector<Index> indices, std::vector<float> weights,
                          std::uint64_t seed) {
  if (indices.size() != weights.size()) throw ValidationError("indices and weights differ in length");
  std::vector<std::size_t> order(indices.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return indices[a] < indices[b]; });
  CoresetResult r;
  r.method = std::move(method);
  r.seed = seed;
  r.fraction = n == 0 ? 0.0 : static_cast<double>(indices.size()) / static_cast<double>(n);
  r.indices.reserve(indices.size());
  r.weights.reserve(indices.size());
  for (auto o : order) {
    if (indices[o] >= n) throw ValidationError(fmt::format("selected index {} outside [0, {})", indices[o], n));
    if (!r.indices.empty() && r.indices.back() == indices[o]) {
      throw ValidationError(fmt::format("index {} selected twice", indices[o]));
    }
    r.indices.push_back(indices[o]);
    r.weights.push_back(weights[o]);
  }
  return r;
}

CoresetResult make_result(std::string method, std::size_t n, std::vector<Index> indices, std::uint64_t seed) {
  std::vector<float> ones(indices.size(), 1.0f);
  return make_result(std::move(method), n, std::move(indices), std::move(ones), seed);
}

CoresetResult random_select(const LabelVector& labels, std::size_t k, bool balanced, std::uint64_t seed) {
  const CounterRng base(seed, Stream::select);
  std::vector<Index> picked;
  for (auto& pool : make_pools(labels, k, balanced)) {
    auto rng = base.split(static_cast<std::uint64_t>(pool.label + 1));
    auto& m = pool.members;
    // Partial Fisher-Yates: the first `budget` slots are a uniform sample.
    for (std::size_t i = 0; i < pool.budget; ++i) {
      const auto j = i + static_cast<std::size_t>(rng.below(m.size() - i));
      std::swap(m[i], m[j]);
      picked.push_back(m[i]);
    }
  }
  return make_result("random", labels.size(), std::move(picked), seed);
}

std::pair<std::vector<Index>, std::vector<Index>> stratified_split(const LabelVector& labels, double fraction,
                                                                   std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction < 1.0)) throw ValidationError(fmt::format("split fraction {} outside [0, 1)", fraction));
  const CounterRng base(seed, Stream::split);
  std::vector<std::vector<Index>> by_class(static_cast<std::size_t>(labels.num_classes));
  for (Index i = 0; i < labels.size(); ++i) by_class[static_cast<std::size_t>(labels.labels[i])].push_back(i);
  std::vector<Index> kept, held;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto& m = by_class[c];
    if (m.empty()) continue;
    const auto want = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(m.size())));
    const std::size_t take = std::min(want, m.size() - 1);
    auto rng = base.split(c + 1);
    rng.shuffle(std::span<Index>(m));
    held.insert(held.end(), m.begin(), m.begin() + static_cast<std::ptrdiff_t>(take));
    kept.insert(kept.end(), m.begin() + static_cast<std::ptrdiff_t>(take), m.end());
  }
  std::sort(kept.begin(), kept.end());
  std::sort(held.begin(), held.end());
  return {std::move(kept), std::move(held)};
}

}  // namespace coreset
