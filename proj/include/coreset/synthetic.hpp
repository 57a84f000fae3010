#pragma once

#include <cstdint>
#include <string>

#include "coreset/types.hpp"

namespace coreset {

/// Gaussian blobs: one isotropic cluster per class, centered on a random
/// direction scaled to `separation`.
///
/// Text form: `c<C>-n<per_class>-d<dim>-sep<separation>[-sig<sigma>][-s<seed>]`,
/// e.g. `c4-n200-d16-sep8`.
struct SyntheticSpec {
  int classes = 4;
  std::size_t per_class = 200;  // training samples per class
  std::size_t dim = 16;
  double separation = 8.0;
  double sigma = 1.0;
  std::uint64_t seed = 0;

  std::string to_string() const;
};

SyntheticSpec parse_synthetic_spec(const std::string& text);

struct LabeledSplit {
  FeatureMatrix features;
  LabelVector labels;
};

struct SyntheticData {
  LabeledSplit train;
  LabeledSplit test;  // max(1, per_class / 4) per class
};

/// Samples are drawn class-interleaved (draw i has class i mod C); within a
/// class every fifth draw goes to the test split until its quota is met.
SyntheticData generate_synthetic(const SyntheticSpec& spec);

}  // namespace coreset
