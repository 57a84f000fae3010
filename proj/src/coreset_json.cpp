#include "coreset/coreset_json.hpp"

#include <fmt/format.h>

#include <fstream>
#include <sstream>

#include "coreset/error.hpp"
#include "json.hpp"

namespace coreset {

using nlohmann::json;

std::string coreset_to_json(const CoresetResult& r) {
  json j;
  j["version"] = kCoresetFileVersion;
  j["method"] = r.method;
  j["fraction"] = r.fraction;
  j["seed"] = r.seed;
  j["params"] = r.params;
  j["indices"] = r.indices;
  j["weights"] = r.weights;
  j["metadata"] = r.metadata;
  return j.dump(2) + "\n";
}

CoresetResult coreset_from_json(const std::string& text, const std::string& source) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(fmt::format("{}: invalid JSON: {}", source, e.what()));
  }
  CoresetResult r;
  try {
    const int version = j.at("version").get<int>();
    if (version != kCoresetFileVersion) {
      throw ValidationError(fmt::format("{}: unsupported version {} (expected {})", source, version, kCoresetFileVersion));
    }
    r.method = j.at("method").get<std::string>();
    r.fraction = j.at("fraction").get<double>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.params = j.at("params").get<Metadata>();
    r.indices = j.at("indices").get<std::vector<Index>>();
    r.weights = j.at("weights").get<std::vector<float>>();
    r.metadata = j.at("metadata").get<Metadata>();
  } catch (const json::exception& e) {
    throw ValidationError(fmt::format("{}: {}", source, e.what()));
  }
  if (r.indices.size() != r.weights.size()) {
    throw ValidationError(fmt::format("{}: {} indices but {} weights", source, r.indices.size(), r.weights.size()));
  }
  for (std::size_t i = 1; i < r.indices.size(); ++i) {
    if (r.indices[i] <= r.indices[i - 1]) throw ValidationError(fmt::format("{}: indices not strictly increasing", source));
  }
  return r;
}

void write_coreset(const CoresetResult& r, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError(fmt::format("cannot write '{}'", path.string()));
  out << coreset_to_json(r);
}

CoresetResult read_coreset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(fmt::format("missing file: {}", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return coreset_from_json(buf.str(), path.string());
}

}  // namespace coreset
