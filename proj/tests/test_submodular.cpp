#include <set>

#include "coreset/error.hpp"
#include "coreset/submodular.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace coreset;

namespace {

SimilarityMatrix three_point() {
  Eigen::MatrixXd s(3, 3);
  s << 1, .5, 0, .5, 1, .5, 0, .5, 1;
  return {s, SimilarityKind::cosine_shifted};
}

SimilarityMatrix random_similarity(std::mt19937_64& rng, std::size_t n) {
  const auto x = testing::random_matrix(rng, n, 3);
  return similarity_from_features(x, SimilarityKind::cosine_shifted);
}

}  // namespace

TEST_CASE("objective examples") {
  const SubmodularObjective fl(ObjectiveKind::facility_location, three_point());
  const SubmodularObjective gc(ObjectiveKind::graph_cut, three_point(), 1.0);
  const std::vector<Index> one{1};
  CHECK(fl.evaluate(one) == doctest::Approx(2.0));
  CHECK(gc.evaluate(one) == doctest::Approx(1.0));
  CHECK(fl.evaluate({}) == 0.0);
  CHECK(gc.evaluate({}) == 0.0);
  const std::vector<Index> bad{3};
  CHECK_THROWS_AS(fl.evaluate(bad), ValidationError);
}

TEST_CASE("greedy and brute force examples") {
  const SubmodularObjective fl(ObjectiveKind::facility_location, three_point());
  for (bool lazy : {false, true}) {
    const auto g = greedy_maximize(fl, 1, lazy);
    CHECK(g.order == std::vector<Index>{1});
    CHECK(g.gains[0] == doctest::Approx(2.0));
    const auto all = greedy_maximize(fl, 3, lazy);
    CHECK(all.value == doctest::Approx(3.0));  // sum of row maxima
  }
  CHECK_THROWS_AS(greedy_maximize(fl, 4, true), ValidationError);
  const auto b = brute_force_optimum(fl, 1);
  CHECK(b.subset == std::vector<Index>{1});
  CHECK(b.value == doctest::Approx(2.0));
  CHECK(brute_force_optimum(fl, 3).subset == std::vector<Index>{0, 1, 2});

  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const auto sim = random_similarity(rng, 7);
    const SubmodularObjective gc(ObjectiveKind::graph_cut, sim, 0.0);
    const Eigen::VectorXd cols = sim.values.colwise().sum();
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < cols.size(); ++j) {
      if (cols(j) > cols(best)) best = j;
    }
    CHECK(brute_force_optimum(gc, 1).subset == std::vector<Index>{static_cast<Index>(best)});
  }
}

TEST_CASE("objectives are submodular on small instances") {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 3 + rng() % 4;
    const auto sim = random_similarity(rng, n);
    for (const SubmodularObjective& f : {SubmodularObjective(ObjectiveKind::facility_location, sim),
                                         SubmodularObjective(ObjectiveKind::graph_cut, sim, 0.5),
                                         SubmodularObjective(ObjectiveKind::graph_cut, sim, 0.2)}) {
      const auto set_of = [&](unsigned mask) {
        std::vector<Index> s;
        for (std::size_t i = 0; i < n; ++i) {
          if (mask >> i & 1u) s.push_back(i);
        }
        return s;
      };
      for (unsigned b = 0; b < (1u << n); ++b) {
        for (unsigned a = b;; a = (a - 1) & b) {  // every subset a of b
          for (std::size_t x = 0; x < n; ++x) {
            if (b >> x & 1u) continue;
            const double ga = f.evaluate(set_of(a | 1u << x)) - f.evaluate(set_of(a));
            const double gb = f.evaluate(set_of(b | 1u << x)) - f.evaluate(set_of(b));
            CHECK(ga >= gb - 1e-9);
            if (f.kind() == ObjectiveKind::facility_location) CHECK(ga >= -1e-12);
          }
          if (a == 0) break;
        }
      }
    }
  }
}

TEST_CASE("lazy greedy matches naive greedy") {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 2 + rng() % 39;
    const std::size_t k = 1 + rng() % n;
    const auto sim = random_similarity(rng, n);
    for (const SubmodularObjective& f : {SubmodularObjective(ObjectiveKind::facility_location, sim),
                                         SubmodularObjective(ObjectiveKind::graph_cut, sim, 0.5),
                                         SubmodularObjective(ObjectiveKind::graph_cut, sim, 0.9)}) {
      const auto a = greedy_maximize(f, k, false);
      const auto b = greedy_maximize(f, k, true);
      CHECK(a.order == b.order);
      CHECK(a.order.size() == k);
      for (std::size_t i = 0; i < k; ++i) CHECK(a.gains[i] == doctest::Approx(b.gains[i]).epsilon(1e-12));
      CHECK(f.evaluate(a.order) == doctest::Approx(a.value).epsilon(1e-9));
    }
  }
}

TEST_CASE("facility location greedy is within 1 - 1/e of optimal") {
  std::mt19937_64 rng(34);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 4 + rng() % 9, k = 1 + rng() % 4;
    const SubmodularObjective fl(ObjectiveKind::facility_location, random_similarity(rng, n));
    const auto g = greedy_maximize(fl, k, true);
    CHECK(g.value >= (1.0 - std::exp(-1.0)) * brute_force_optimum(fl, k).value - 1e-12);
    for (std::size_t i = 1; i < k; ++i) CHECK(g.gains[i] <= g.gains[i - 1] + 1e-12);
  }
}

TEST_CASE("submodular selection examples") {
  // two directions: cosine similarity clusters by angle
  const auto x = testing::matrix(8, 2, {1, 0.05f, 1, 0.1f, 1, -0.05f, 1, 0.02f, 0.05f, 1, 0.1f, 1, -0.05f, 1, 0.02f, 1});
  const auto y = LabelVector{std::vector<std::int32_t>(8, 0), 1};
  const auto r = submodular_select(x, y, 2, false);
  REQUIRE(r.indices.size() == 2);
  CHECK(r.indices[0] < 4);
  CHECK(r.indices[1] >= 4);
  const SubmodularObjective fl(ObjectiveKind::facility_location, similarity_from_features(x, SimilarityKind::cosine_shifted));
  const auto opt = brute_force_optimum(fl, 2).subset;
  CHECK(opt[0] < 4);
  CHECK(opt[1] >= 4);

  std::mt19937_64 rng(35);
  const auto base = testing::random_matrix(rng, 6, 4);
  FloatMatrix twice(12, 4);
  for (std::size_t i = 0; i < 12; ++i) {
    for (std::size_t c = 0; c < 4; ++c) twice(i, c) = base(i % 6, c);
  }
  const auto dup = submodular_select(twice, LabelVector{std::vector<std::int32_t>(12, 0), 1}, 6, false);
  std::set<Index> originals;
  for (auto i : dup.indices) originals.insert(i % 6);
  CHECK(originals.size() == 6);

  const auto yb = testing::labels({0, 1, 0, 1, 0, 1, 0, 1}, 2);
  for (auto kind : {ObjectiveKind::facility_location, ObjectiveKind::graph_cut}) {
    SubmodularOptions o;
    o.kind = kind;
    const auto bal = submodular_select(x, yb, 4, true, o);
    int per[2] = {0, 0};
    for (auto i : bal.indices) ++per[yb.labels[i]];
    CHECK(per[0] == 2);
    CHECK(per[1] == 2);
    CHECK(bal.method == (kind == ObjectiveKind::facility_location ? "fl" : "gc"));
  }
}

TEST_CASE("dense and on-demand kernels select the same points") {
  std::mt19937_64 rng(36);
  const auto x = testing::random_matrix(rng, 40, 5);
  const auto y = testing::random_labels(rng, 40, 3);
  SubmodularOptions dense, lazy;
  lazy.dense_cap = 0;
  CHECK(submodular_select(x, y, 9, true, dense).indices == submodular_select(x, y, 9, true, lazy).indices);
}
