#pragma once

#include <filesystem>
#include <string>

#include "coreset/types.hpp"

namespace coreset {

inline constexpr int kCoresetFileVersion = 1;

/// coreset.json: {version, method, fraction, seed, params, indices, weights,
/// metadata}. Keys are emitted in sorted order so equal results serialize to
/// identical bytes.
std::string coreset_to_json(const CoresetResult& r);
CoresetResult coreset_from_json(const std::string& text, const std::string& source = "coreset.json");

void write_coreset(const CoresetResult& r, const std::filesystem::path& path);
CoresetResult read_coreset(const std::filesystem::path& path);

}  // namespace coreset
