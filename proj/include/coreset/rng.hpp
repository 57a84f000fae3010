#pragma once

#include <cstdint>
#include <span>
#include <utility>

namespace coreset {

/// Named sub-streams. Each consumer draws from its own stream so that, e.g.,
/// changing the shuffle order never perturbs weight initialization.
enum class Stream : std::uint64_t {
  init = 1,
  shuffle = 2,
  data = 3,
  select = 4,
  split = 5,
};

/// Counter-based 64-bit generator ("SplitMix64-CTR").
///
/// key     = mix64(seed ^ mix64(stream * 0xD1B54A32D192ED03))
/// value_i = mix64(key + (i + 1) * 0x9E3779B97F4A7C15)
///
/// where mix64 is the SplitMix64 finalizer
///   z ^= z >> 30; z *= 0xBF58476D1CE4E5B9;
///   z ^= z >> 27; z *= 0x94D049BB133111EB;
///   z ^= z >> 31.
///
/// uniform() = (value >> 11) * 2^-53; below(n) uses rejection on the top of
/// the 64-bit range; normal() is Box-Muller using log/cos of two successive
/// uniforms (the second output is not cached). Everything is specified here so
/// alternative implementations can reproduce streams byte for byte.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, Stream stream) : CounterRng(seed, static_cast<std::uint64_t>(stream)) {}
  CounterRng(std::uint64_t seed, std::uint64_t stream);

  static std::uint64_t mix64(std::uint64_t z);

  std::uint64_t next_u64();
  double uniform();
  std::uint64_t below(std::uint64_t n);
  double normal();

  /// Derives an independent child stream (e.g. one per class pool).
  CounterRng split(std::uint64_t child) const;

  template <typename T>
  void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(values[i - 1], values[j]);
    }
  }

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace coreset
