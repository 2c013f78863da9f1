#include <regex>

#include "doctest.h"
#include "matsol/report.hpp"
#include "matsol/scenario_io.hpp"

using namespace matsol;

TEST_CASE("report json and text carry the same numbers") {
  const Scenario s = preset("scalar1");
  const OperatorData od = build_operator_data(s);
  RunReport r("verify");
  r.set_scenario(s, od);
  ResidualReport rr;
  rr.equation = "mkdv";
  rr.h = 0.01;
  rr.samples = 25;
  rr.sup = 1.0 / 3.0 * 1e-7;
  rr.rms = 2.718281828459045e-9;
  r.add_residual(rr);
  r.add_check("1", "scalar", true, "ok", 0.5);
  r.add_timing("evaluate", 0.125);
  r.set_status(2, "threshold");

  const Json& j = r.json();
  CHECK(j["command"] == "verify");
  CHECK(j["scenario"]["d"] == 1);
  CHECK(j["residuals"][0]["sup"].get<double>() == rr.sup);
  CHECK(j["status"]["exit_code"] == 2);
  CHECK(Json::parse(r.json_text()) == j);

  const std::string text = r.human_text();
  CHECK(text.find("sup: " + Json(rr.sup).dump()) != std::string::npos);
  CHECK(text.find("rms: 2.718281828459045e-09") != std::string::npos);
  CHECK(text.find("convention: imaginary_weights") != std::string::npos);
  CHECK(text.find("exit_code: 2") != std::string::npos);
  CHECK(text.find("result: PASS") != std::string::npos);

  // Every number in the text appears in the JSON dump.
  const std::string json = r.json_text();
  const std::regex num(R"(-?\d+\.\d+(e[-+]\d+)?)");
  for (auto it = std::sregex_iterator(text.begin(), text.end(), num); it != std::sregex_iterator(); ++it) {
    CAPTURE(it->str());
    CHECK(json.find(it->str()) != std::string::npos);
  }
}

TEST_CASE("render_text layout") {
  Json j = {{"a", 1}, {"b", {{"c", "x"}, {"v", {1.5, 2}}}}, {"list", Json::array({{{"k", 1}, {"m", 2}}})},
            {"none", Json::array()}};
  CHECK(render_text(j) == "a: 1\nb:\n  c: x\n  v: [1.5, 2]\nlist:\n  - k: 1\n    m: 2\nnone: []\n");
}

TEST_CASE("mask counts") {
  MatrixField f({0.0, 1.0, 3, 0.0, 0.0, 1}, 1);
  f.state = {PointState::regular, PointState::singular, PointState::overflow};
  RunReport r("evaluate");
  r.set_mask(f);
  CHECK(r.json()["mask"]["singular"] == 1);
  CHECK(r.json()["mask"]["overflow"] == 1);
  CHECK(r.json()["mask"]["masked"] == 2);
}
