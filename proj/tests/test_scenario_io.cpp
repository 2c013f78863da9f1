#include <filesystem>

#include "doctest.h"
#include "matsol/errors.hpp"
#include "matsol/scenario_io.hpp"
#include "test_support.hpp"

using namespace matsol;

namespace {

const char* kMinimal = R"(d: 1
solitons:
  - k: 1
    B: [[1]]
grid:
  x: [-5, 5, 11]
  t: [0, 1, 3]
)";

ScenarioParseError parse_failure(const std::string& doc) {
  try {
    parse_scenario(doc);
  } catch (const ScenarioParseError& e) {
    return e;
  }
  FAIL("document parsed unexpectedly");
  return ScenarioParseError(ParseErrorKind::syntax, "", 0, 0);
}

std::filesystem::path scenario_dir() { return std::filesystem::path(MATSOL_SOURCE_DIR) / "scenarios"; }

}  // namespace

TEST_CASE("minimal document") {
  const Scenario s = parse_scenario(kMinimal);
  CHECK(s.d == 1);
  REQUIRE(s.n() == 1);
  CHECK(s.entries[0].k == Complex{1.0, 0.0});
  CHECK(s.entries[0].weight(0, 0) == Complex{1.0, 0.0});
  CHECK(s.grid == GridSpec{-5.0, 5.0, 11, 0.0, 1.0, 3});
  CHECK_FALSE(s.options.imaginary_weights);
  CHECK(s.options.path == EvalPath::fast);
}

TEST_CASE("complex entries as [re, im] pairs") {
  const Scenario s = parse_scenario(R"(d: 2
solitons:
  - k: [1.5, -0.25]
    B: [[[0, 1], 2], [3, [4, -5]]]
grid: {x: [-1, 1, 5], t: [0, 0, 1]}
options: {imaginary_weights: true, path: det, label: pair}
)");
  CHECK(s.entries[0].k == Complex{1.5, -0.25});
  CHECK(s.entries[0].weight(0, 0) == Complex{0.0, 1.0});
  CHECK(s.entries[0].weight(1, 1) == Complex{4.0, -5.0});
  CHECK(s.options.imaginary_weights);
  CHECK(s.options.path == EvalPath::det);
  CHECK(s.label == "pair");
}

TEST_CASE("JSON documents are accepted") {
  const Scenario s = parse_scenario(
      R"({"d": 1, "solitons": [{"k": 2, "B": [[1]]}], "grid": {"x": [-1, 1, 3], "t": [0, 1, 2]}})");
  CHECK(s.entries[0].k == Complex{2.0, 0.0});
}

TEST_CASE("missing grid is a schema error naming the key") {
  const auto e = parse_failure("d: 1\nsolitons:\n  - k: 1\n    B: [[1]]\n");
  CHECK(e.kind() == ParseErrorKind::schema);
  CHECK(e.detail().find("`grid`") != std::string::npos);
  CHECK(e.line() >= 1);
  CHECK(std::string(e.what()).find("schema error at line") == 0);
}

TEST_CASE("syntax, schema and validation errors carry positions") {
  SUBCASE("syntax") {
    const auto e = parse_failure("d: 1\nsolitons: [\n  - k: 1\n");
    CHECK(e.kind() == ParseErrorKind::syntax);
    CHECK(e.line() >= 2);
    CHECK(e.column() >= 1);
  }
  SUBCASE("schema: wrong row count") {
    const auto e = parse_failure(R"(d: 2
solitons:
  - k: 1
    B: [[1, 0]]
grid: {x: [-1, 1, 3], t: [0, 1, 2]}
)");
    CHECK(e.kind() == ParseErrorKind::schema);
    CHECK(e.line() == 4);
    CHECK(e.column() == 8);
    CHECK(e.detail().find("expected d = 2") != std::string::npos);
  }
  SUBCASE("schema: unknown key") {
    const auto e = parse_failure(std::string(kMinimal) + "colour: red\n");
    CHECK(e.kind() == ParseErrorKind::schema);
    CHECK(e.line() == 8);
    CHECK(e.column() == 1);
    CHECK(e.detail().find("`colour`") != std::string::npos);
  }
  SUBCASE("schema: not a number") {
    const auto e = parse_failure(R"(d: 1
solitons:
  - k: one
    B: [[1]]
grid: {x: [-1, 1, 3], t: [0, 1, 2]}
)");
    CHECK(e.kind() == ParseErrorKind::schema);
    CHECK(e.line() == 3);
    CHECK(e.column() == 8);
  }
  SUBCASE("validation: nonpositive real part") {
    const auto e = parse_failure(R"(d: 1
solitons:
  - k: 1
    B: [[1]]
  - k: [-0.5, 1]
    B: [[1]]
grid: {x: [-1, 1, 3], t: [0, 1, 2]}
)");
    CHECK(e.kind() == ParseErrorKind::validation);
    CHECK(e.line() == 5);
    CHECK(e.column() == 5);
    REQUIRE_FALSE(e.issues().empty());
    bool found = false;
    for (const auto& i : e.issues()) found = found || i.code == IssueCode::nonpositive_real_part;
    CHECK(found);
  }
  SUBCASE("validation: bad grid") {
    const auto e = parse_failure(R"(d: 1
solitons:
  - k: 1
    B: [[1]]
grid:
  x: [1, -1, 3]
  t: [0, 1, 2]
)");
    CHECK(e.kind() == ParseErrorKind::validation);
    CHECK(e.line() == 6);
  }
}

TEST_CASE("shipped scenario files") {
  const Scenario fig2 = load_scenario(scenario_dir() / "fig2.yaml");
  CHECK(fig2.d == 3);
  CHECK(fig2.n() == 2);
  CHECK(fig2.options.imaginary_weights);
  CHECK(fig2.entries[1].k == Complex{2.0, 0.0});
  CHECK(fig2.grid == GridSpec{-15.0, 15.0, 601, -6.0, 6.0, 241});
  for (const auto& name : {"fig3", "fig4", "scalar1", "complex2x2", "singular"}) {
    CAPTURE(name);
    CHECK_NOTHROW(load_scenario(scenario_dir() / (std::string(name) + ".yaml")));
  }
  CHECK_THROWS_AS(load_scenario(scenario_dir() / "missing.yaml"), IoError);
}

TEST_CASE("files and presets agree") {
  for (const auto& name : {"fig2", "fig3", "fig4", "scalar1"}) {
    CAPTURE(name);
    const Scenario a = load_scenario(scenario_dir() / (std::string(name) + ".yaml"));
    const Scenario b = preset(name);
    CHECK(a.d == b.d);
    CHECK(a.grid == b.grid);
    CHECK(a.options.imaginary_weights == b.options.imaginary_weights);
    REQUIRE(a.n() == b.n());
    for (std::size_t j = 0; j < a.n(); ++j) {
      CHECK(a.entries[j].k == b.entries[j].k);
      CHECK(testing::max_abs_diff(a.entries[j].weight, b.entries[j].weight) == 0.0);
    }
  }
}

TEST_CASE("presets") {
  CHECK(preset_names().size() == 5);
  for (const auto& name : preset_names()) {
    const Scenario s = preset(name);
    CHECK(s.options.imaginary_weights);
    CHECK(s.label == name);
    CHECK_NOTHROW(validate_scenario(s));
  }
  CHECK(testing::max_abs_diff(preset("fig4").entries[0].weight, testing::caption_fig4()) == 0.0);
  CHECK(preset("scalar2").n() == 2);
  CHECK_THROWS_AS(preset("fig9"), Error);
}

TEST_CASE("yaml round trip is exact") {
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 10; ++rep) {
    Scenario s = testing::random_scenario(rng, 1 + rep % 3, 1 + rep % 2);
    s.options.path = rep % 2 ? EvalPath::det : EvalPath::fast;
    s.options.imaginary_weights = rep % 3 == 0;
    s.label = rep == 4 ? "label: with colon" : "r" + std::to_string(rep);
    const Scenario back = parse_scenario(scenario_to_yaml(s));
    CHECK(back.d == s.d);
    CHECK(back.grid == s.grid);
    CHECK(back.label == s.label);
    CHECK(back.options.path == s.options.path);
    CHECK(back.options.imaginary_weights == s.options.imaginary_weights);
    REQUIRE(back.n() == s.n());
    for (std::size_t j = 0; j < s.n(); ++j) {
      CHECK(back.entries[j].k == s.entries[j].k);
      CHECK(testing::max_abs_diff(back.entries[j].weight, s.entries[j].weight) == 0.0);
    }
  }
}
