#include "coreset/cli.hpp"

#include <fmt/format.h>

#include <filesystem>
#include <fstream>
#include <ostream>

#include "CLI11.hpp"
#include "coreset/artifact.hpp"
#include "coreset/coreset_json.hpp"
#include "coreset/csv.hpp"
#include "coreset/error.hpp"
#include "coreset/experiment.hpp"
#include "coreset/methods.hpp"

namespace coreset {

namespace fs = std::filesystem;

namespace {

struct TrainFlags {
  std::string arch = "mlp1";
  std::size_t epochs = 20;
  std::size_t batch_size = 32;
  double lr = 0.1;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  std::string schedule = "cosine";
  std::size_t hidden = 32;

  void add(CLI::App* app) {
    app->add_option("--arch", arch, "Proxy architecture: linear | mlp1")->capture_default_str();
    app->add_option("--epochs", epochs, "Training epochs")->capture_default_str();
    app->add_option("--batch-size", batch_size, "Mini-batch size")->capture_default_str();
    app->add_option("--lr", lr, "Peak learning rate")->capture_default_str();
    app->add_option("--momentum", momentum, "SGD momentum")->capture_default_str();
    app->add_option("--weight-decay", weight_decay, "L2 weight decay")->capture_default_str();
    app->add_option("--lr-schedule", schedule, "constant | cosine")->capture_default_str();
    app->add_option("--hidden", hidden, "Hidden width for mlp1")->capture_default_str();
  }

  TrainConfig config(std::uint64_t seed) const {
    TrainConfig c;
    c.epochs = epochs;
    c.batch_size = batch_size;
    c.lr = lr;
    c.momentum = momentum;
    c.weight_decay = weight_decay;
    c.lr_schedule = parse_lr_schedule(schedule);
    c.hidden = hidden;
    c.seed = seed;
    c.validate();
    return c;
  }
};

struct MethodFlags {
  std::optional<double> lambda;
  std::size_t knn = 10;
  double eta = 0.1;
  std::size_t refresh = 0;
  std::string grad_space = "error_vector";
  std::string metric = "euclidean";
  std::string similarity = "cosine_shifted";
  bool no_bias = false;
  bool balanced = false;

  void add(CLI::App* app) {
    app->add_flag("--balanced", balanced, "Split the budget evenly across classes");
    app->add_option("--lambda", lambda, "Graph-cut trade-off (default 0.5) or GradMatch ridge (default 1.0)");
    app->add_option("--knn", knn, "Neighbors for cal")->capture_default_str();
    app->add_option("--eta", eta, "GLISTER step size")->capture_default_str();
    app->add_option("--refresh", refresh, "GLISTER picks per re-linearization (0 = budget / 10)")->capture_default_str();
    app->add_option("--grad-space", grad_space, "error_vector | full_last_layer")->capture_default_str();
    app->add_option("--metric", metric, "k-center distance: euclidean | cosine | sym_kl")->capture_default_str();
    app->add_option("--similarity", similarity, "fl/gc kernel: cosine_shifted | rbf | neg_euclidean_shifted")
        ->capture_default_str();
    app->add_flag("--no-bias", no_bias, "GraNd without the bias gradient");
  }

  MethodOptions options(const TrainFlags& train, std::uint64_t seed) const {
    MethodOptions o;
    o.balanced = balanced;
    o.seed = seed;
    o.lambda = lambda;
    o.knn = knn;
    o.eta = eta;
    o.refresh = refresh;
    o.grad_space = parse_gradient_space(grad_space);
    o.metric = parse_distance_metric(metric);
    o.similarity = parse_similarity_kind(similarity);
    o.grand_bias = !no_bias;
    o.proxy_arch = parse_arch(train.arch);
    o.proxy_epochs = train.epochs;
    TrainFlags t = train;
    t.epochs = std::max<std::size_t>(t.epochs, 1);
    o.proxy = t.config(seed);
    return o;
  }
};

LabeledSplit load_test_split(const std::string& test_dir, const std::string& test_csv, const std::string& artifact_dir,
                             int num_classes) {
  if (!test_csv.empty()) return read_labeled_csv(test_csv, num_classes);
  const fs::path dir = test_dir.empty() ? fs::path(artifact_dir) / "test" : fs::path(test_dir);
  if (!fs::exists(dir / "manifest.json")) {
    throw ValidationError(fmt::format("no test split: {} has no manifest.json (pass --test or --test-csv)", dir.string()));
  }
  auto t = load_artifact(dir);
  return {std::move(t.features), std::move(t.labels)};
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError(fmt::format("cannot write '{}'", path.string()));
  out << text;
}

std::vector<double> parse_fractions(const std::vector<std::string>& items) {
  std::vector<double> out;
  for (const auto& s : items) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(s, &pos));
      if (pos != s.size()) throw std::invalid_argument(s);
    } catch (const std::logic_error&) {
      throw ValidationError(fmt::format("bad fraction '{}'", s));
    }
  }
  return out;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Coreset selection engine: trace, select, eval, sweep", "coreset"};
  app.require_subcommand(1);

  // trace
  auto* trace = app.add_subcommand("trace", "Train a proxy and write a dataset artifact with its training trace");
  std::string synthetic, csv, test_csv_in, trace_out;
  int ref_epoch = -1;
  std::uint64_t trace_seed = 0;
  double val_fraction = 0.0;
  TrainFlags trace_train;
  auto* src = trace->add_option_group("source");
  src->add_option("--synthetic", synthetic, "Synthetic spec, e.g. c4-n200-d16-sep8");
  src->add_option("--csv", csv, "Training CSV (label in the last column)");
  src->require_option(1);
  trace->add_option("--test-csv", test_csv_in, "Test CSV copied to <out>/test");
  trace->add_option("--ref-epoch", ref_epoch, "Epoch whose model is snapshotted (default: --epochs)");
  trace->add_option("--seed", trace_seed, "Training seed")->capture_default_str();
  trace->add_option("--val-fraction", val_fraction, "Stratified validation hold-out")->capture_default_str();
  trace->add_option("-o,--out", trace_out, "Output artifact directory")->required();
  trace_train.add(trace);

  // select
  auto* select = app.add_subcommand("select", "Select a coreset and write coreset.json");
  std::string sel_artifact, sel_method, sel_out;
  std::vector<std::string> sel_runs;
  double sel_fraction = 0.0;
  std::uint64_t sel_seed = 0;
  MethodFlags sel_flags;
  TrainFlags sel_train;
  select->add_option("--artifact", sel_artifact, "Artifact directory")->required();
  select->add_option("--method", sel_method, "Selection method")->required()->check(CLI::IsMember(method_names()));
  select->add_option("--fraction", sel_fraction, "Fraction of the training set to keep")->required();
  select->add_option("--seed", sel_seed, "Selection seed")->capture_default_str();
  select->add_option("--runs", sel_runs, "Further artifacts whose scores are averaged with --artifact");
  select->add_option("-o,--out", sel_out, "Output coreset.json")->required();
  sel_flags.add(select);
  sel_train.epochs = 0;
  sel_train.add(select);
  select->get_option("--epochs")->description("deepfool proxy epochs (0 = the trace's reference epoch)");

  // eval
  auto* eval = app.add_subcommand("eval", "Train on a coreset and report test accuracy");
  std::string ev_artifact, ev_coreset, ev_test, ev_test_csv, ev_out;
  std::size_t ev_repeats = 1;
  std::uint64_t ev_seed = 0;
  TrainFlags ev_train;
  eval->add_option("--artifact", ev_artifact, "Artifact directory")->required();
  eval->add_option("--coreset", ev_coreset, "coreset.json (default: the full training set)");
  eval->add_option("--test", ev_test, "Test artifact directory (default: <artifact>/test)");
  eval->add_option("--test-csv", ev_test_csv, "Test CSV");
  eval->add_option("--repeats", ev_repeats, "Training repeats; repeat r uses seed + r")->capture_default_str();
  eval->add_option("--seed", ev_seed, "Base training seed")->capture_default_str();
  eval->add_option("-o,--out", ev_out, "Write the JSON report here");
  ev_train.add(eval);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Evaluate methods x fractions x repeats");
  std::string sw_artifact, sw_test, sw_test_csv, sw_csv, sw_table;
  std::vector<std::string> sw_methods, sw_fractions;
  std::size_t sw_repeats = 3;
  std::uint64_t sw_seed = 0;
  MethodFlags sw_flags;
  TrainFlags sw_train;
  sweep->add_option("--artifact", sw_artifact, "Artifact directory")->required();
  sweep->add_option("--methods", sw_methods, "Methods (comma separated or 'all')")->delimiter(',')->required();
  sweep->add_option("--fractions", sw_fractions, "Fractions (comma separated)")->delimiter(',')->required();
  sweep->add_option("--repeats", sw_repeats, "Repeats per cell")->capture_default_str();
  sweep->add_option("--seed", sw_seed, "Base seed for selection and training")->capture_default_str();
  sweep->add_option("--test", sw_test, "Test artifact directory (default: <artifact>/test)");
  sweep->add_option("--test-csv", sw_test_csv, "Test CSV");
  sweep->add_option("--csv", sw_csv, "Write the CSV here");
  sweep->add_option("--table", sw_table, "Write the aligned table here");
  sw_flags.add(sweep);
  sw_train.add(sweep);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : static_cast<int>(ErrorKind::validation);
  }

  try {
    if (*trace) {
      const TrainConfig cfg = trace_train.config(trace_seed);
      const int ref = ref_epoch < 0 ? static_cast<int>(cfg.epochs) : ref_epoch;
      if (static_cast<std::size_t>(ref) > cfg.epochs) {
        throw ValidationError(fmt::format("--ref-epoch {} exceeds --epochs {}", ref, cfg.epochs));
      }
      LabeledSplit data;
      std::optional<LabeledSplit> test;
      if (!synthetic.empty()) {
        auto gen = generate_synthetic(parse_synthetic_spec(synthetic));
        data = std::move(gen.train);
        test = std::move(gen.test);
      } else {
        data = read_labeled_csv(csv);
      }
      if (!test_csv_in.empty()) test = read_labeled_csv(test_csv_in, data.labels.num_classes);
      const auto artifact = build_trace_artifact(data, parse_arch(trace_train.arch), cfg, ref, val_fraction);
      save_artifact(artifact, trace_out);
      if (test) {
        if (test->labels.num_classes != artifact.labels.num_classes) {
          throw ValidationError("test split has labels outside the training classes");
        }
        save_artifact(DatasetArtifact{test->features, test->labels, std::nullopt, std::nullopt},
                      fs::path(trace_out) / "test");
      }
      out << fmt::format("wrote artifact {} (n={}, d={}, C={}, E={}, reference_epoch={}{})\n", trace_out,
                         artifact.size(), artifact.features.cols, artifact.labels.num_classes, cfg.epochs, ref,
                         artifact.validation ? fmt::format(", val_n={}", artifact.validation->features.rows) : "");
    } else if (*select) {
      const auto artifact = load_artifact(sel_artifact);
      std::vector<DatasetArtifact> runs;
      if (!sel_runs.empty()) {
        runs.push_back(artifact);
        for (const auto& dir : sel_runs) runs.push_back(load_artifact(dir));
      }
      MethodOptions o = sel_flags.options(sel_train, sel_seed);
      o.method = sel_method;
      o.fraction = sel_fraction;
      const auto result = run_method(artifact, o, runs);
      write_coreset(result, sel_out);
      out << fmt::format("{}: selected {} of {} samples -> {}\n", result.method, result.indices.size(),
                         artifact.size(), sel_out);
    } else if (*eval) {
      const auto artifact = load_artifact(ev_artifact);
      const auto test = load_test_split(ev_test, ev_test_csv, ev_artifact, artifact.labels.num_classes);
      const auto coreset = ev_coreset.empty() ? full_coreset(artifact.size()) : read_coreset(ev_coreset);
      const auto report = evaluate_repeats(artifact, coreset, test, parse_arch(ev_train.arch),
                                           ev_train.config(ev_seed), ev_repeats);
      if (!ev_out.empty()) write_text(ev_out, report.to_json());
      out << report.summary() << '\n';
    } else if (*sweep) {
      const auto artifact = load_artifact(sw_artifact);
      const auto test = load_test_split(sw_test, sw_test_csv, sw_artifact, artifact.labels.num_classes);
      SweepConfig cfg;
      for (const auto& m : sw_methods) {
        if (m == "all") {
          cfg.methods.insert(cfg.methods.end(), method_names().begin(), method_names().end());
        } else if (!m.empty()) {
          cfg.methods.push_back(m);
        }
      }
      for (const auto& m : cfg.methods) {
        if (std::find(method_names().begin(), method_names().end(), m) == method_names().end()) {
          throw ValidationError(fmt::format("unknown method '{}'", m));
        }
      }
      cfg.fractions = parse_fractions(sw_fractions);
      cfg.repeats = sw_repeats;
      cfg.selection = sw_flags.options(sw_train, sw_seed);
      cfg.arch = parse_arch(sw_train.arch);
      cfg.train = sw_train.config(sw_seed);
      const auto rows = run_sweep(artifact, test, cfg);
      if (!sw_csv.empty()) write_text(sw_csv, sweep_csv(rows));
      const auto table = sweep_table(rows);
      if (!sw_table.empty()) write_text(sw_table, table);
      out << table;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(ErrorKind::validation);
  }
  return 0;
}

}  // namespace coreset
