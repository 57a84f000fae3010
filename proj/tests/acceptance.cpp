// Acceptance suite: one PASS/FAIL line per criterion, with wall time.
#include <fmt/format.h>

#include <chrono>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>

#include "coreset/artifact.hpp"
#include "coreset/boundary.hpp"
#include "coreset/cli.hpp"
#include "coreset/geometry.hpp"
#include "coreset/matching.hpp"
#include "coreset/methods.hpp"
#include "coreset/scores.hpp"
#include "coreset/selection.hpp"
#include "coreset/submodular.hpp"
#include "coreset/trainer.hpp"
#include "support.hpp"

using namespace coreset;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Counts checks and keeps the first failure message.
struct Tally {
  std::size_t checks = 0, failures = 0;
  std::string first;

  void expect(bool ok, const std::string& what) {
    ++checks;
    if (ok) return;
    if (failures++ == 0) first = what;
  }
  Outcome outcome(const std::string& summary) const {
    if (failures == 0) return {true, fmt::format("{} ({} checks)", summary, checks)};
    return {false, fmt::format("{} of {} checks failed; first: {}", failures, checks, first)};
  }
};

TrainingTrace softmax_rows(std::size_t classes, const std::vector<float>& values) {
  TrainingTrace t;
  t.softmax = FloatMatrix(values.size() / classes, classes, values);
  return t;
}

Outcome score_formulas() {
  Tally t;
  for (std::size_t c : {2u, 3u, 4u, 7u, 10u}) {
    std::vector<float> onehot(c, 0.0f), uniform(c, 1.0f / static_cast<float>(c)), tie(c, 0.0f);
    onehot[c / 2] = 1.0f;
    tie[0] = tie[1] = 0.5f;
    const auto hot = softmax_rows(c, onehot), uni = softmax_rows(c, uniform), tied = softmax_rows(c, tie);
    t.expect(least_confidence(hot).scores[0] == 0.0, fmt::format("lc one-hot C={}", c));
    t.expect(entropy_score(hot).scores[0] == 0.0, fmt::format("entropy one-hot C={}", c));
    t.expect(margin_score(hot).scores[0] == 0.0, fmt::format("margin one-hot C={}", c));
    const double cd = static_cast<double>(c);
    // float32 storage of 1/C is the only rounding source
    t.expect(std::abs(least_confidence(uni).scores[0] - (1.0 - 1.0 / cd)) < 1e-7, fmt::format("lc uniform C={}", c));
    t.expect(std::abs(entropy_score(uni).scores[0] - std::log(cd)) < 1e-6, fmt::format("entropy uniform C={}", c));
    t.expect(margin_score(tied).scores[0] == 1.0, fmt::format("margin tie C={}", c));
  }
  const auto row = softmax_rows(3, {0.5f, 0.3f, 0.2f});
  const double h = -(0.5 * std::log(0.5) + 0.3 * std::log(0.3) + 0.2 * std::log(0.2));
  t.expect(std::abs(least_confidence(row).scores[0] - 0.5) < 1e-6, "lc (0.5,0.3,0.2)");
  t.expect(std::abs(entropy_score(row).scores[0] - 1.029653) < 1e-6 && std::abs(h - 1.029653) < 1e-6,
           "entropy (0.5,0.3,0.2)");
  t.expect(std::abs(margin_score(row).scores[0] - 0.8) < 1e-6, "margin (0.5,0.3,0.2)");
  return t.outcome("extremes and hand-computed row");
}

Outcome forgetting_oracle() {
  Tally t;
  std::mt19937_64 rng(1001);
  for (int m = 0; m < 1000; ++m) {
    const std::size_t e = 2 + rng() % 19, n = 1 + rng() % 50;
    TrainingTrace tr;
    tr.num_epochs = e;
    tr.softmax = FloatMatrix(n, 2);
    const int density = static_cast<int>(rng() % 5);  // vary how often samples are correct
    for (std::size_t k = 0; k < e * n; ++k) tr.correctness.push_back(static_cast<std::uint8_t>(static_cast<int>(rng() % 5) < density));
    const auto s = forgetting_count(tr).scores;
    for (std::size_t i = 0; i < n; ++i) {
      int count = 0;
      bool learned = false;
      for (std::size_t ep = 0; ep < e; ++ep) {
        const bool now = tr.correctness[ep * n + i] != 0;
        learned = learned || now;
        if (ep + 1 < e && now && tr.correctness[(ep + 1) * n + i] == 0) ++count;
      }
      t.expect(s[i] == (learned ? count : static_cast<double>(e)), fmt::format("matrix {} sample {}", m, i));
    }
  }
  return t.outcome("1000 matrices, E <= 20, n <= 50");
}

Outcome grand_identity() {
  Tally t;
  std::mt19937_64 rng(1002);
  const auto rel = [](double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(std::abs(b), 1e-300); };
  for (int k = 0; k < 500; ++k) {
    const std::size_t n = 1 + rng() % 40, c = 2 + rng() % 9, h = 1 + rng() % 32;
    const auto y = testing::random_labels(rng, n, static_cast<int>(c));
    const auto tr = testing::random_trace(rng, y, h, 2);
    const auto g0 = grand_score(tr, false).scores, g1 = grand_score(tr, true).scores, e = el2n_score(tr).scores;
    for (std::size_t i = 0; i < n; ++i) {
      double f2 = 0.0;
      for (float v : tr.penultimate.row(i)) f2 += static_cast<double>(v) * v;
      t.expect(rel(g0[i], e[i] * std::sqrt(f2)), fmt::format("trace {} sample {} (no bias)", k, i));
      t.expect(rel(g1[i], e[i] * std::sqrt(f2 + 1.0)), fmt::format("trace {} sample {} (bias)", k, i));
    }
  }
  return t.outcome("500 traces, both variants, 1e-9 relative");
}

double dist(const FloatMatrix& x, std::size_t i, std::size_t j) {
  double s = 0.0;
  for (std::size_t c = 0; c < x.cols; ++c) s += std::pow(static_cast<double>(x(i, c)) - x(j, c), 2);
  return std::sqrt(s);
}

template <class F>
void for_each_subset(std::size_t n, std::size_t k, F&& visit) {
  std::vector<Index> s(k);
  std::iota(s.begin(), s.end(), Index{0});
  while (true) {
    visit(s);
    std::size_t i = k;
    while (i > 0 && s[i - 1] == n - k + i - 1) --i;
    if (i == 0) return;
    ++s[i - 1];
    for (std::size_t j = i; j < k; ++j) s[j] = s[j - 1] + 1;
  }
}

Outcome kcenter_two_approx() {
  Tally t;
  std::mt19937_64 rng(1003);
  double worst = 0.0;
  for (int inst = 0; inst < 200; ++inst) {
    const std::size_t n = 2 + rng() % 9, k = 1 + rng() % std::min<std::size_t>(3, n), d = 1 + rng() % 3;
    const auto x = testing::random_matrix(rng, n, d, -5.0, 5.0);
    const auto radius = [&](const std::vector<Index>& s) {
      double r = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double near = std::numeric_limits<double>::infinity();
        for (auto j : s) near = std::min(near, dist(x, i, j));
        r = std::max(r, near);
      }
      return r;
    };
    double opt = std::numeric_limits<double>::infinity();
    for_each_subset(n, k, [&](const std::vector<Index>& s) { opt = std::min(opt, radius(s)); });
    for (std::size_t init = 0; init < n; ++init) {
      const double g = radius(k_center_order(x, DistanceMetric::euclidean, k, init));
      if (opt > 0) worst = std::max(worst, g / opt);
      t.expect(g <= 2.0 * opt + 1e-12, fmt::format("instance {} init {}: {} > 2 x {}", inst, init, g, opt));
    }
  }
  return t.outcome(fmt::format("200 instances, worst ratio {:.3f}", worst));
}

Outcome submodular_bound() {
  Tally t;
  std::mt19937_64 rng(1004);
  const double bound = 1.0 - std::exp(-1.0);
  double worst = 1.0;
  for (int inst = 0; inst < 200; ++inst) {
    const std::size_t n = 2 + rng() % 11, k = 1 + rng() % std::min<std::size_t>(4, n);
    const auto x = testing::random_matrix(rng, n, 1 + rng() % 4);
    const auto sim = similarity_from_features(x, inst % 2 ? SimilarityKind::cosine_shifted : SimilarityKind::rbf);
    const auto fl_value = [&](const std::vector<Index>& s) {
      double v = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double best = 0.0;
        for (auto j : s) best = std::max(best, sim.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
        v += best;
      }
      return v;
    };
    double opt = 0.0;
    for_each_subset(n, k, [&](const std::vector<Index>& s) { opt = std::max(opt, fl_value(s)); });
    const auto g = greedy_maximize(SubmodularObjective(ObjectiveKind::facility_location, sim), k, true);
    worst = std::min(worst, fl_value(g.order) / opt);
    t.expect(fl_value(g.order) >= bound * opt - 1e-12, fmt::format("FL instance {}", inst));
  }
  for (int inst = 0; inst < 200; ++inst) {
    const std::size_t n = 1 + rng() % 40, k = 1 + rng() % n;
    const auto sim = similarity_from_features(testing::random_matrix(rng, n, 1 + rng() % 6), SimilarityKind::cosine_shifted);
    const auto kind = inst % 2 ? ObjectiveKind::graph_cut : ObjectiveKind::facility_location;
    const SubmodularObjective f(kind, sim, inst % 4 == 1 ? 0.9 : 0.5);
    const auto a = greedy_maximize(f, k, false), b = greedy_maximize(f, k, true);
    t.expect(a.order == b.order, fmt::format("lazy/naive instance {} ({})", inst, to_string(kind)));
  }
  return t.outcome(fmt::format("200 FL bound + 200 lazy/naive, worst greedy/opt {:.4f}", worst));
}

Eigen::MatrixXd gaussian(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c) {
  std::normal_distribution<double> nd;
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = nd(rng);
  return m;
}

Outcome omp_checks() {
  Tally t;
  std::mt19937_64 rng(1005);
  for (int inst = 0; inst < 200; ++inst) {
    const Eigen::Index g = 2 + static_cast<Eigen::Index>(rng() % 8), n = g + 1 + static_cast<Eigen::Index>(rng() % 20);
    const Eigen::MatrixXd atoms = gaussian(rng, n, g);
    const Eigen::VectorXd b = gaussian(rng, g, 1);
    const auto partial = orthogonal_matching_pursuit(atoms, b, 1 + rng() % static_cast<std::size_t>(n), 0.0, false);
    bool mono = true;
    for (std::size_t i = 1; i < partial.residual_norms.size(); ++i) {
      mono = mono && partial.residual_norms[i] <= partial.residual_norms[i - 1] + 1e-12;
    }
    t.expect(mono, fmt::format("monotone instance {}", inst));
    const auto full = orthogonal_matching_pursuit(atoms, b, static_cast<std::size_t>(g), 0.0, false);
    t.expect(full.residual_norms.back() < 1e-6, fmt::format("recovery instance {}: {}", inst, full.residual_norms.back()));
  }
  for (int inst = 0; inst < 50; ++inst) {
    const Eigen::Index g = 3 + static_cast<Eigen::Index>(rng() % 6);
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(gaussian(rng, g, g)).householderQ();
    const Eigen::VectorXd b = gaussian(rng, g, 1);
    const Eigen::VectorXd corr = q * b;
    std::vector<Index> idx(static_cast<std::size_t>(g));
    std::iota(idx.begin(), idx.end(), Index{0});
    std::sort(idx.begin(), idx.end(), [&](Index x, Index y) { return std::abs(corr(static_cast<Eigen::Index>(x))) > std::abs(corr(static_cast<Eigen::Index>(y))); });
    const std::size_t k = 1 + rng() % static_cast<std::size_t>(g);
    const auto r = orthogonal_matching_pursuit(q, b, k, 0.0, false);
    for (std::size_t i = 0; i < k; ++i) {
      t.expect(r.order[i] == idx[i], fmt::format("orthonormal {} pick {}", inst, i));
      t.expect(std::abs(r.weights(static_cast<Eigen::Index>(i)) - corr(static_cast<Eigen::Index>(idx[i]))) < 1e-9,
               fmt::format("orthonormal {} weight {}", inst, i));
    }
  }
  return t.outcome("200 monotone/recovery + 50 orthonormal");
}

Outcome deepfool_linear() {
  Tally t;
  std::mt19937_64 rng(1006);
  double worst = 0.0;
  for (int m = 0; m < 10; ++m) {
    const std::size_t d = 2 + rng() % 8, c = 2 + rng() % 5;
    const auto model = init_model(Arch::linear, d, c, 1, 100 + m);
    const auto x = testing::random_matrix(rng, 10, d, -3.0, 3.0);
    const auto closed = deepfool_margin_linear(model.out_weight, model.out_bias, x).scores;
    const auto iter = deepfool_iterative(&model, x).scores;
    for (std::size_t i = 0; i < 10; ++i) {
      const double r = std::abs(iter[i] - closed[i]) / std::max(closed[i], 1e-12);
      worst = std::max(worst, r);
      t.expect(r <= 1e-3, fmt::format("model {} sample {}: {} vs {}", m, i, iter[i], closed[i]));
    }
  }
  return t.outcome(fmt::format("100 samples, worst relative error {:.2e}", worst));
}

Outcome gradient_check() {
  Tally t;
  std::mt19937_64 rng(1007);
  double worst = 0.0;
  for (int m = 0; m < 20; ++m) {
    const Arch arch = m % 2 ? Arch::mlp1 : Arch::linear;
    const std::size_t d = 2 + rng() % 5, c = 2 + rng() % 4, n = 3 + rng() % 10;
    auto model = init_model(arch, d, c, 2 + rng() % 6, 200 + m);
    const auto x = testing::random_matrix(rng, n, d, -2.0, 2.0);
    const auto y = testing::random_labels(rng, n, static_cast<int>(c));
    std::vector<Index> rows(n);
    std::iota(rows.begin(), rows.end(), Index{0});
    std::vector<double> w(n);
    for (auto& v : w) v = 0.25 + static_cast<double>(rng() % 100) / 50.0;
    const auto analytic = loss_and_gradient(model, x, y, rows, w).grad;
    auto p = flatten_parameters(model);
    for (std::size_t k = 0; k < p.size(); ++k) {
      const double keep = p[k], h = 1e-5;
      p[k] = keep + h;
      assign_parameters(model, p);
      const double up = loss_and_gradient(model, x, y, rows, w).loss;
      p[k] = keep - h;
      assign_parameters(model, p);
      const double down = loss_and_gradient(model, x, y, rows, w).loss;
      p[k] = keep;
      assign_parameters(model, p);
      const double fd = (up - down) / (2.0 * h);
      const double r = std::abs(fd - analytic[k]) / std::max(1.0, std::abs(fd));
      worst = std::max(worst, r);
      t.expect(r <= 1e-4, fmt::format("model {} parameter {}: {} vs {}", m, k, analytic[k], fd));
    }
  }
  return t.outcome(fmt::format("20 models, worst relative error {:.2e}", worst));
}

struct Cli {
  int code;
  std::string err;
};

Cli cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, err.str()};
}

Outcome end_to_end() {
  Tally t;
  const auto dir = testing::scratch_dir("acceptance_e2e");
  const auto art = (dir / "golden").string();
  const auto tr = cli({"trace", "--synthetic", "c4-n200-d16-sep8", "--epochs", "20", "--ref-epoch", "2", "--seed", "0",
                       "--val-fraction", "0.1", "-o", art});
  if (tr.code != 0) return {false, "trace failed: " + tr.err};

  const auto start = std::chrono::steady_clock::now();
  const auto sw = cli({"sweep", "--artifact", art, "--methods", "all", "--fractions", "0.1,0.5,1.0", "--repeats", "3",
                       "--balanced", "--epochs", "20", "--seed", "0", "--csv", (dir / "sweep.csv").string()});
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (sw.code != 0) return {false, "sweep failed: " + sw.err};
  t.expect(seconds < 600.0, fmt::format("sweep took {:.1f} s", seconds));

  std::ifstream csv(dir / "sweep.csv");
  std::string line;
  std::getline(csv, line);
  std::map<std::string, std::map<std::string, double>> acc;
  std::size_t rows = 0;
  while (std::getline(csv, line)) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    acc[f[0]][f[1]] = std::stod(f[3]);
    ++rows;
  }
  t.expect(rows == 18 * 3, fmt::format("sweep has {} rows", rows));
  const double full = acc["random"]["1"];
  t.expect(full >= 0.97, fmt::format("full-data accuracy {:.4f}", full));
  std::string worst_method;
  double worst_gap = -1.0;
  for (const auto& m : method_names()) {
    const double gap = full - acc[m]["0.5"];
    if (gap > worst_gap) worst_gap = gap, worst_method = m;
    t.expect(gap <= 0.03, fmt::format("{} at 0.5 is {:.2f} points below full", m, 100 * gap));
  }
  t.expect(std::abs(full - acc["random"]["0.5"]) <= 0.02, "random at 0.5 not within 2 points");

  const auto a = load_artifact(art);
  for (const auto& m : method_names()) {
    for (double fraction : {0.1, 0.5}) {
      for (std::uint64_t seed = 0; seed < 3; ++seed) {
        MethodOptions o;
        o.method = m;
        o.fraction = fraction;
        o.balanced = true;
        o.seed = seed;
        o.proxy_epochs = 20;
        const auto r = run_method(a, o);
        const auto quotas = class_quotas(budget_from_fraction(a.size(), fraction), a.labels.num_classes);
        std::vector<std::size_t> per(quotas.size(), 0);
        for (auto i : r.indices) ++per[static_cast<std::size_t>(a.labels.labels[i])];
        t.expect(per == quotas, fmt::format("{} @ {} seed {} quotas", m, fraction, seed));
      }
    }
  }
  return t.outcome(fmt::format("full {:.2f}%, random@0.5 {:.2f}%, largest gap {:.2f} pts ({}), sweep {:.1f} s",
                               100 * full, 100 * acc["random"]["0.5"], 100 * worst_gap, worst_method, seconds));
}

Outcome determinism() {
  Tally t;
  const auto dir = testing::scratch_dir("acceptance_det");
  for (const char* run : {"one", "two"}) {
    const auto root = dir / run;
    const auto art = (root / "art").string();
    t.expect(cli({"trace", "--synthetic", "c4-n60-d8-sep6", "--epochs", "6", "--ref-epoch", "3", "--seed", "5",
                  "--val-fraction", "0.2", "-o", art}).code == 0, "trace");
    t.expect(cli({"trace", "--synthetic", "c4-n60-d8-sep6", "--epochs", "6", "--ref-epoch", "3", "--seed", "6",
                  "-o", (root / "art2").string()}).code == 0, "second trace");
    for (const auto& m : method_names()) {
      const auto out = (root / (m + ".json")).string();
      t.expect(cli({"select", "--artifact", art, "--method", m, "--fraction", "0.3", "--balanced", "--seed", "9",
                    "--epochs", "5", "-o", out}).code == 0, "select " + m);
    }
    t.expect(cli({"trace", "--synthetic", "c4-n60-d8-sep6", "--epochs", "6", "--ref-epoch", "3", "--seed", "7",
                  "-o", (root / "art3").string()}).code == 0, "third trace");
    t.expect(cli({"select", "--artifact", (root / "art2").string(), "--method", "el2n", "--fraction", "0.3", "--runs",
                  (root / "art3").string(), "-o", (root / "el2n_avg.json").string()}).code == 0, "select --runs");
    t.expect(cli({"eval", "--artifact", art, "--coreset", (root / "craig.json").string(), "--epochs", "5",
                  "--repeats", "2", "-o", (root / "eval.json").string()}).code == 0, "eval");
  }
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir / "one")) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), dir / "one");
    t.expect(testing::file_bytes(e.path()) == testing::file_bytes(dir / "two" / rel), rel.string() + " differs");
    ++files;
  }
  return t.outcome(fmt::format("{} files byte-identical across reruns", files));
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"score formula suite", score_formulas},
      {"forgetting oracle", forgetting_oracle},
      {"GraNd/EL2N identity", grand_identity},
      {"k-center 2-approximation", kcenter_two_approx},
      {"submodular greedy bound and lazy equivalence", submodular_bound},
      {"OMP residuals, recovery, orthonormal closed form", omp_checks},
      {"DeepFool linear oracle", deepfool_linear},
      {"trainer gradient check", gradient_check},
      {"end-to-end desk run", end_to_end},
      {"CLI determinism", determinism},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << fmt::format("{}  {:<48} {:>9.4f} s  {}\n", o.pass ? "PASS" : "FAIL", name, s, o.detail) << std::flush;
    failed += o.pass ? 0 : 1;
  }
  std::cout << fmt::format("{} of {} criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
