#include "coreset/artifact.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>

#include "coreset/error.hpp"
#include "coreset/tensor_io.hpp"
#include "json.hpp"

namespace coreset {

using nlohmann::json;

namespace {

constexpr const char* kManifest = "manifest.json";

void require_finite(const FloatMatrix& m, const std::string& file, const std::string& field) {
  for (std::size_t i = 0; i < m.rows; ++i) {
    for (std::size_t j = 0; j < m.cols; ++j) {
      if (!std::isfinite(m(i, j))) {
        throw ValidationError(fmt::format("{}: {} row {} column {} is not finite", file, field, i, j));
      }
    }
  }
}

void validate_trace(const TrainingTrace& t, const LabelVector& labels, std::size_t n, const std::string& prefix) {
  const auto file = [&](const char* base) { return prefix + base + ".dctf"; };
  const std::size_t classes = static_cast<std::size_t>(labels.num_classes);

  if (t.num_epochs < 1) throw ValidationError(file("correctness") + ": trace needs at least one epoch");
  if (t.correctness.size() != t.num_epochs * n) {
    throw ValidationError(fmt::format("{}: correctness has {} entries, expected E*n = {}", file("correctness"),
                                      t.correctness.size(), t.num_epochs * n));
  }
  for (std::size_t k = 0; k < t.correctness.size(); ++k) {
    if (t.correctness[k] > 1) {
      throw ValidationError(fmt::format("{}: correctness epoch {} sample {} is {}, expected 0 or 1",
                                        file("correctness"), k / n, k % n, t.correctness[k]));
    }
  }
  if (t.reference_epoch < 0 || static_cast<std::size_t>(t.reference_epoch) > t.num_epochs) {
    throw ValidationError(fmt::format("{}: reference_epoch {} outside [0, {}]", kManifest, t.reference_epoch,
                                      t.num_epochs));
  }

  if (t.softmax.rows != n || t.softmax.cols != classes) {
    throw ValidationError(fmt::format("{}: softmax shape {}x{}, expected {}x{}", file("softmax"), t.softmax.rows,
                                      t.softmax.cols, n, classes));
  }
  require_finite(t.softmax, file("softmax"), "softmax");
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t c = 0; c < classes; ++c) {
      if (t.softmax(i, c) < 0.0f) {
        throw ValidationError(fmt::format("{}: softmax row {} has negative entry {}", file("softmax"), i,
                                          static_cast<double>(t.softmax(i, c))));
      }
      sum += t.softmax(i, c);
    }
    if (std::abs(sum - 1.0) > kSoftmaxSumTolerance) {
      throw ValidationError(fmt::format("{}: softmax row {} sums to {:.6g}", file("softmax"), i, sum));
    }
  }

  if (t.losses.size() != n) {
    throw ValidationError(fmt::format("{}: losses length {}, expected {}", file("losses"), t.losses.size(), n));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(t.losses[i]) || t.losses[i] < 0.0f) {
      throw ValidationError(fmt::format("{}: loss {} is {}, expected finite and >= 0", file("losses"), i,
                                        static_cast<double>(t.losses[i])));
    }
  }

  if (t.error_vectors.rows != n || t.error_vectors.cols != classes) {
    throw ValidationError(fmt::format("{}: error_vectors shape {}x{}, expected {}x{}", file("error_vectors"),
                                      t.error_vectors.rows, t.error_vectors.cols, n, classes));
  }
  require_finite(t.error_vectors, file("error_vectors"), "error_vectors");
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < classes; ++c) {
      const double expected = static_cast<double>(t.softmax(i, c)) - (labels.labels[i] == static_cast<int>(c) ? 1.0 : 0.0);
      if (std::abs(static_cast<double>(t.error_vectors(i, c)) - expected) > kErrorVectorTolerance) {
        throw ValidationError(fmt::format("{}: error_vectors row {} column {} is {:.6g}, softmax - onehot gives {:.6g}",
                                          file("error_vectors"), i, c, static_cast<double>(t.error_vectors(i, c)),
                                          expected));
      }
    }
  }

  if (t.penultimate.rows != n || t.penultimate.cols < 1) {
    throw ValidationError(fmt::format("{}: penultimate shape {}x{}, expected {} rows and >= 1 column",
                                      file("penultimate"), t.penultimate.rows, t.penultimate.cols, n));
  }
  require_finite(t.penultimate, file("penultimate"), "penultimate");
}

json tensor_entry(const std::string& file, const Tensor& t) {
  return json{{"file", file}, {"shape", t.shape}, {"dtype", dtype_name(t.dtype)}};
}

struct TensorSet {
  std::vector<std::pair<std::string, Tensor>> items;
  void add(std::string name, Tensor t) { items.emplace_back(std::move(name), std::move(t)); }
};

void add_split(TensorSet& set, const FeatureMatrix& f, const LabelVector& l, const std::optional<TrainingTrace>& t,
               const std::string& prefix) {
  set.add(prefix + "features.dctf", to_tensor(f));
  set.add(prefix + "labels.dctf", to_tensor(std::span<const std::int32_t>(l.labels)));
  if (!t) return;
  set.add(prefix + "correctness.dctf", to_tensor(std::span<const std::uint8_t>(t->correctness), t->num_epochs, f.rows));
  set.add(prefix + "softmax.dctf", to_tensor(t->softmax));
  set.add(prefix + "losses.dctf", to_tensor(std::span<const float>(t->losses)));
  set.add(prefix + "error_vectors.dctf", to_tensor(t->error_vectors));
  set.add(prefix + "penultimate.dctf", to_tensor(t->penultimate));
}

class ManifestReader {
 public:
  ManifestReader(std::filesystem::path dir, const json& manifest) : dir_(std::move(dir)) {
    if (!manifest.contains("tensors") || !manifest["tensors"].is_array()) {
      throw ValidationError(std::string(kManifest) + ": missing tensors list");
    }
    for (const auto& e : manifest["tensors"]) {
      declared_.emplace(e.at("file").get<std::string>(), e);
    }
  }

  bool listed(const std::string& file) const { return declared_.contains(file); }

  Tensor read(const std::string& file, const std::vector<std::uint64_t>& expected_shape) const {
    auto it = declared_.find(file);
    if (it == declared_.end()) throw ValidationError(fmt::format("{}: {} is not listed", kManifest, file));
    const auto declared_shape = it->second.at("shape").get<std::vector<std::uint64_t>>();
    const auto declared_dtype = it->second.at("dtype").get<std::string>();
    if (declared_shape != expected_shape) {
      throw ValidationError(fmt::format("{}: declared shape of {} disagrees with n/d/C/h/E", kManifest, file));
    }
    Tensor t = read_tensor(dir_ / file);
    if (t.shape != declared_shape) {
      throw ValidationError(fmt::format("{}: shape in tensor header disagrees with manifest", file));
    }
    if (dtype_name(t.dtype) != declared_dtype) {
      throw ValidationError(fmt::format("{}: dtype {} disagrees with manifest ({})", file, dtype_name(t.dtype),
                                        declared_dtype));
    }
    return t;
  }

 private:
  std::filesystem::path dir_;
  std::map<std::string, json> declared_;
};

std::uint64_t get_dim(const json& m, const char* key) {
  if (!m.contains(key) || !m[key].is_number_integer() || m[key].get<std::int64_t>() < 0) {
    throw ValidationError(fmt::format("{}: field '{}' missing or not a nonnegative integer", kManifest, key));
  }
  return m[key].get<std::uint64_t>();
}

std::optional<TrainingTrace> read_trace(const ManifestReader& r, const std::string& prefix, std::uint64_t n,
                                        std::uint64_t classes, std::uint64_t h, std::uint64_t epochs,
                                        int reference_epoch) {
  const std::vector<std::string> names = {"correctness", "softmax", "losses", "error_vectors", "penultimate"};
  std::size_t present = 0;
  for (const auto& name : names) present += r.listed(prefix + name + ".dctf") ? 1 : 0;
  if (present == 0) return std::nullopt;
  for (const auto& name : names) {
    if (!r.listed(prefix + name + ".dctf")) {
      throw ValidationError(fmt::format("{}: trace is partial, {}{}.dctf is not listed", kManifest, prefix, name));
    }
  }
  TrainingTrace t;
  t.num_epochs = epochs;
  t.reference_epoch = reference_epoch;
  const std::string f = prefix;
  t.correctness = tensor_to_bytes(r.read(f + "correctness.dctf", {epochs, n}), f + "correctness.dctf");
  t.softmax = tensor_to_matrix(r.read(f + "softmax.dctf", {n, classes}), f + "softmax.dctf");
  t.losses = tensor_to_floats(r.read(f + "losses.dctf", {n}), f + "losses.dctf");
  t.error_vectors = tensor_to_matrix(r.read(f + "error_vectors.dctf", {n, classes}), f + "error_vectors.dctf");
  t.penultimate = tensor_to_matrix(r.read(f + "penultimate.dctf", {n, h}), f + "penultimate.dctf");
  return t;
}

}  // namespace

void validate_split(const FeatureMatrix& features, const LabelVector& labels,
                    const std::optional<TrainingTrace>& trace, const std::string& prefix) {
  const std::string ffile = prefix + "features.dctf";
  const std::string lfile = prefix + "labels.dctf";
  if (features.rows < 1 || features.cols < 1) {
    throw ValidationError(fmt::format("{}: features must be at least 1x1, got {}x{}", ffile, features.rows, features.cols));
  }
  if (features.data.size() != features.rows * features.cols) {
    throw ValidationError(ffile + ": features buffer size disagrees with shape");
  }
  require_finite(features, ffile, "features");
  if (labels.num_classes < 2) {
    throw ValidationError(fmt::format("{}: num_classes C = {}, expected >= 2", kManifest, labels.num_classes));
  }
  if (labels.size() != features.rows) {
    throw ValidationError(fmt::format("{}: {} labels for {} samples", lfile, labels.size(), features.rows));
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels.labels[i] < 0 || labels.labels[i] >= labels.num_classes) {
      throw ValidationError(fmt::format("{}: label {} is {}, outside [0, {})", lfile, i, labels.labels[i],
                                        labels.num_classes));
    }
  }
  if (trace) validate_trace(*trace, labels, features.rows, prefix);
}

void validate_artifact(const DatasetArtifact& a) {
  validate_split(a.features, a.labels, a.trace, "");
  if (a.validation) {
    const auto& v = a.validation;
    if (v->labels.num_classes != a.labels.num_classes) {
      throw ValidationError("val_labels.dctf: validation num_classes differs from training");
    }
    if (v->features.cols != a.features.cols) throw ValidationError("val_features.dctf: feature dimension differs");
    validate_split(v->features, v->labels, v->trace, "val_");
    if (a.trace && v->trace.penultimate.cols != a.trace->penultimate.cols) {
      throw ValidationError("val_penultimate.dctf: penultimate width differs from training");
    }
  }
}

void save_artifact(const DatasetArtifact& a, const std::filesystem::path& dir) {
  validate_artifact(a);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ValidationError("cannot create directory " + dir.string() + ": " + ec.message());

  TensorSet set;
  add_split(set, a.features, a.labels, a.trace, "");
  if (a.validation) add_split(set, a.validation->features, a.validation->labels, a.validation->trace, "val_");

  json manifest;
  manifest["schema_version"] = kSchemaVersion;
  manifest["n"] = a.features.rows;
  manifest["d"] = a.features.cols;
  manifest["C"] = a.labels.num_classes;
  manifest["h"] = a.trace ? a.trace->penultimate.cols : 0;
  manifest["E"] = a.trace ? a.trace->num_epochs : 0;
  manifest["reference_epoch"] = a.trace ? a.trace->reference_epoch : 0;
  manifest["val_n"] = a.validation ? a.validation->features.rows : 0;
  manifest["tensors"] = json::array();
  for (const auto& [name, tensor] : set.items) {
    manifest["tensors"].push_back(tensor_entry(name, tensor));
    write_tensor(dir / name, tensor);
  }
  std::ofstream out(dir / kManifest, std::ios::trunc);
  if (!out) throw ValidationError("cannot write " + (dir / kManifest).string());
  out << manifest.dump(2) << '\n';
  if (!out) throw ValidationError("write failed: " + (dir / kManifest).string());
}

DatasetArtifact load_artifact(const std::filesystem::path& dir) {
  std::ifstream in(dir / kManifest);
  if (!in) throw ValidationError("missing file: " + (dir / kManifest).string());
  json m;
  try {
    m = json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError(std::string(kManifest) + ": " + e.what());
  }
  try {
    if (!m.contains("schema_version") || m["schema_version"] != kSchemaVersion) {
      throw ValidationError(fmt::format("{}: schema_version must be {}", kManifest, kSchemaVersion));
    }
    const auto n = get_dim(m, "n");
    const auto d = get_dim(m, "d");
    const auto classes = get_dim(m, "C");
    const auto h = get_dim(m, "h");
    const auto epochs = get_dim(m, "E");
    const auto ref = static_cast<int>(get_dim(m, "reference_epoch"));
    const auto val_n = m.contains("val_n") ? get_dim(m, "val_n") : 0;
    if (n < 1) throw ValidationError(fmt::format("{}: n must be >= 1", kManifest));

    ManifestReader reader(dir, m);
    DatasetArtifact a;
    a.features = tensor_to_matrix(reader.read("features.dctf", {n, d}), "features.dctf");
    a.labels.labels = tensor_to_ints(reader.read("labels.dctf", {n}), "labels.dctf");
    a.labels.num_classes = static_cast<int>(classes);
    a.trace = read_trace(reader, "", n, classes, h, epochs, ref);

    if (val_n > 0) {
      ValidationSplit v;
      v.features = tensor_to_matrix(reader.read("val_features.dctf", {val_n, d}), "val_features.dctf");
      v.labels.labels = tensor_to_ints(reader.read("val_labels.dctf", {val_n}), "val_labels.dctf");
      v.labels.num_classes = static_cast<int>(classes);
      auto vt = read_trace(reader, "val_", val_n, classes, h, epochs, ref);
      if (!vt) throw ValidationError(std::string(kManifest) + ": validation split requires val_* trace tensors");
      v.trace = std::move(*vt);
      a.validation = std::move(v);
    }
    validate_artifact(a);
    return a;
  } catch (const json::exception& e) {
    throw ValidationError(std::string(kManifest) + ": " + e.what());
  }
}

std::size_t budget_from_fraction(std::size_t n, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw ValidationError(fmt::format("fraction {} outside (0, 1]", fraction));
  }
  if (n == 0) throw ValidationError("cannot take a budget of an empty set");
  const auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  return std::clamp<std::size_t>(k, 1, n);
}

void fill_error_vectors(TrainingTrace& trace, const LabelVector& labels) {
  const std::size_t n = trace.softmax.rows;
  const std::size_t classes = trace.softmax.cols;
  trace.error_vectors = FloatMatrix(n, classes);
  trace.losses.assign(n, 0.0f);
  for (std::size_t i = 0; i < n; ++i) {
    const auto y = static_cast<std::size_t>(labels.labels[i]);
    for (std::size_t c = 0; c < classes; ++c) {
      trace.error_vectors(i, c) = static_cast<float>(static_cast<double>(trace.softmax(i, c)) - (c == y ? 1.0 : 0.0));
    }
    trace.losses[i] = static_cast<float>(-std::log(std::max(static_cast<double>(trace.softmax(i, y)), 1e-12)));
  }
}

}  // namespace coreset
