#include "coreset/csv.hpp"

#include <fmt/format.h>

#include <charconv>
#include <fstream>
#include <optional>
#include <string_view>

#include "coreset/error.hpp"

namespace coreset {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::optional<std::vector<double>> parse_row(std::string_view line) {
  std::vector<double> values;
  while (true) {
    const auto comma = line.find(',');
    const auto field = trim(line.substr(0, comma));
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) return std::nullopt;
    values.push_back(v);
    if (comma == std::string_view::npos) break;
    line.remove_prefix(comma + 1);
  }
  return values;
}

}  // namespace

LabeledSplit read_labeled_csv(const std::filesystem::path& path, int min_classes) {
  std::ifstream in(path);
  if (!in) throw ValidationError(fmt::format("cannot open CSV '{}'", path.string()));
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto row = parse_row(line);
    if (!row) {
      if (rows.empty() && line_no == 1) continue;  // header
      throw ValidationError(fmt::format("{}:{}: non-numeric field", path.string(), line_no));
    }
    if (row->size() < 2) throw ValidationError(fmt::format("{}:{}: need at least one feature and a label", path.string(), line_no));
    if (!rows.empty() && row->size() != rows.front().size()) {
      throw ValidationError(fmt::format("{}:{}: expected {} columns, found {}", path.string(), line_no,
                                        rows.front().size(), row->size()));
    }
    rows.push_back(std::move(*row));
  }
  if (rows.empty()) throw ValidationError(fmt::format("CSV '{}' has no data rows", path.string()));

  const std::size_t d = rows.front().size() - 1;
  LabeledSplit out;
  out.features = FloatMatrix(rows.size(), d);
  int max_label = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < d; ++j) out.features(i, j) = static_cast<float>(rows[i][j]);
    const double y = rows[i][d];
    if (y < 0 || y != static_cast<double>(static_cast<std::int32_t>(y))) {
      throw ValidationError(fmt::format("{}: row {} has label {} (need a non-negative integer)", path.string(), i, y));
    }
    out.labels.labels.push_back(static_cast<std::int32_t>(y));
    max_label = std::max(max_label, static_cast<int>(y));
  }
  out.labels.num_classes = std::max({max_label + 1, min_classes, 2});
  return out;
}

}  // namespace coreset
