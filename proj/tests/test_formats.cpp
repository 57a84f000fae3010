#include <fstream>

#include "coreset/coreset_json.hpp"
#include "coreset/csv.hpp"
#include "coreset/error.hpp"
#include "coreset/selection.hpp"
#include "doctest.h"
#include "support.hpp"
#include "json.hpp"

using namespace coreset;

namespace {

void write_text(const std::filesystem::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST_CASE("labeled csv") {
  const auto dir = testing::scratch_dir("csv");
  write_text(dir / "a.csv", "x1,x2,label\n0.5,1.5,1\n-2,3e-1,0\n4,5,1\n");
  const auto s = read_labeled_csv(dir / "a.csv");
  CHECK(s.features == testing::matrix(3, 2, {0.5f, 1.5f, -2, 0.3f, 4, 5}));
  CHECK(s.labels == testing::labels({1, 0, 1}, 2));

  write_text(dir / "b.csv", "1,2,0\n3,4,0\n");
  CHECK(read_labeled_csv(dir / "b.csv").features.rows == 2);
  CHECK(read_labeled_csv(dir / "b.csv", 5).labels.num_classes == 5);

  write_text(dir / "ragged.csv", "1,2,0\n3,1\n");
  CHECK_THROWS_WITH_AS(read_labeled_csv(dir / "ragged.csv"), doctest::Contains("3"), ValidationError);
  write_text(dir / "neg.csv", "1,2,-1\n");
  CHECK_THROWS_AS(read_labeled_csv(dir / "neg.csv"), ValidationError);
  write_text(dir / "frac.csv", "1,2,0.5\n");
  CHECK_THROWS_AS(read_labeled_csv(dir / "frac.csv"), ValidationError);
  CHECK_THROWS_AS(read_labeled_csv(dir / "missing.csv"), Error);
}

TEST_CASE("coreset json round trip") {
  auto r = make_result("craig", 10, {7, 2, 4}, {3.0f, 1.0f, 0.25f}, 42);
  r.params["grad_space"] = "error_vector";
  r.metadata["note"] = "x";
  const auto text = coreset_to_json(r);
  const auto back = coreset_from_json(text);
  CHECK(back == r);
  CHECK(coreset_to_json(back) == text);

  const auto dir = testing::scratch_dir("coreset_json");
  write_coreset(r, dir / "c.json");
  CHECK(read_coreset(dir / "c.json") == r);
  CHECK_THROWS_WITH_AS(read_coreset(dir / "none.json"), doctest::Contains("missing"), Error);

  auto j = nlohmann::json::parse(text);
  j["indices"] = {4, 2, 7};
  CHECK_THROWS_AS(coreset_from_json(j.dump()), ValidationError);
  j = nlohmann::json::parse(text);
  j["weights"] = {1.0};
  CHECK_THROWS_AS(coreset_from_json(j.dump()), ValidationError);
  j = nlohmann::json::parse(text);
  j["version"] = 99;
  CHECK_THROWS_AS(coreset_from_json(j.dump()), ValidationError);
  CHECK_THROWS_AS(coreset_from_json("{not json"), ValidationError);
}
