#include "coreset/synthetic.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <regex>

#include "coreset/error.hpp"
#include "coreset/rng.hpp"

namespace coreset {

namespace {

template <typename T>
T parse_number(const std::string& text, const std::string& field) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) throw ValidationError(fmt::format("synthetic spec: bad {} '{}'", field, text));
  return value;
}

}  // namespace

std::string SyntheticSpec::to_string() const {
  std::string out = fmt::format("c{}-n{}-d{}-sep{}", classes, per_class, dim, separation);
  if (sigma != 1.0) out += fmt::format("-sig{}", sigma);
  if (seed != 0) out += fmt::format("-s{}", seed);
  return out;
}

SyntheticSpec parse_synthetic_spec(const std::string& text) {
  static const std::regex pattern(R"(c(\d+)-n(\d+)-d(\d+)-sep([0-9.]+)(?:-sig([0-9.]+))?(?:-s(\d+))?)");
  std::smatch m;
  if (!std::regex_match(text, m, pattern)) {
    throw ValidationError(fmt::format("synthetic spec '{}' does not match c<C>-n<N>-d<D>-sep<S>[-sig<s>][-s<seed>]", text));
  }
  SyntheticSpec spec;
  spec.classes = parse_number<int>(m[1].str(), "class count");
  spec.per_class = parse_number<std::size_t>(m[2].str(), "per-class count");
  spec.dim = parse_number<std::size_t>(m[3].str(), "dimension");
  spec.separation = parse_number<double>(m[4].str(), "separation");
  if (m[5].matched) spec.sigma = parse_number<double>(m[5].str(), "sigma");
  if (m[6].matched) spec.seed = parse_number<std::uint64_t>(m[6].str(), "seed");
  if (spec.classes < 2) throw ValidationError("synthetic spec needs at least 2 classes");
  if (spec.per_class < 1 || spec.dim < 1) throw ValidationError("synthetic spec needs n >= 1 and d >= 1");
  if (!(spec.sigma > 0.0)) throw ValidationError("synthetic spec needs sigma > 0");
  return spec;
}

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  const auto classes = static_cast<std::size_t>(spec.classes);
  const std::size_t test_quota = std::max<std::size_t>(1, spec.per_class / 4);
  const std::size_t draws = spec.per_class + test_quota;
  CounterRng rng(spec.seed, Stream::data);

  std::vector<std::vector<double>> centers(classes, std::vector<double>(spec.dim));
  for (auto& c : centers) {
    double norm = 0.0;
    while (norm == 0.0) {
      norm = 0.0;
      for (auto& v : c) {
        v = rng.normal();
        norm += v * v;
      }
      norm = std::sqrt(norm);
    }
    for (auto& v : c) v *= spec.separation / norm;
  }

  SyntheticData out;
  out.train.features = FloatMatrix(classes * spec.per_class, spec.dim);
  out.test.features = FloatMatrix(classes * test_quota, spec.dim);
  out.train.labels.num_classes = out.test.labels.num_classes = spec.classes;
  std::vector<std::size_t> train_count(classes, 0), test_count(classes, 0);
  std::size_t train_row = 0, test_row = 0;
  for (std::size_t i = 0; i < classes * draws; ++i) {
    const std::size_t c = i % classes;
    const std::size_t j = i / classes;
    const bool to_test = (j % 5 == 4 && test_count[c] < test_quota) || train_count[c] == spec.per_class;
    auto& split = to_test ? out.test : out.train;
    auto row = split.features.row(to_test ? test_row++ : train_row++);
    for (std::size_t t = 0; t < spec.dim; ++t) row[t] = static_cast<float>(centers[c][t] + spec.sigma * rng.normal());
    split.labels.labels.push_back(static_cast<std::int32_t>(c));
    ++(to_test ? test_count : train_count)[c];
  }
  return out;
}

}  // namespace coreset
