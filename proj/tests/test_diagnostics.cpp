#include <cmath>

#include "doctest.h"
#include "matsol/diagnostics.hpp"
#include "matsol/errors.hpp"
#include "test_support.hpp"

using namespace matsol;
using namespace matsol::testing;

namespace {

MatrixField evaluate(const Scenario& s) { return evaluate_grid(build_operator_data(s), s.grid, EvalPath::fast); }

Scenario scalar_two_soliton() {
  Scenario s;
  s.d = 1;
  s.entries = {{1.0, ComplexMatrix{{1.0}}}, {2.0, ComplexMatrix{{1.0}}}};
  s.grid = {-30.0, 30.0, 1201, -4.0, 4.0, 161};
  s.options.imaginary_weights = true;
  return s;
}

}  // namespace

TEST_CASE("simpson: polynomial exactness and the 3/8 closure") {
  std::vector<double> cubic;
  for (int i = 0; i <= 10; ++i) cubic.push_back(std::pow(0.1 * i, 3));
  CHECK(simpson(std::span<const double>(cubic), 0.1) == doctest::Approx(0.25).epsilon(1e-14));
  cubic.pop_back();  // 9 intervals, odd
  CHECK(simpson(std::span<const double>(cubic), 0.1) == doctest::Approx(std::pow(0.9, 4) / 4).epsilon(1e-14));
  const std::vector<double> two{1.0, 3.0};
  CHECK(simpson(std::span<const double>(two), 0.5) == 1.0);
  const std::vector<Complex> c{{0.0, 1.0}, {0.0, 1.0}, {0.0, 1.0}, {0.0, 1.0}};
  CHECK(std::abs(simpson(std::span<const Complex>(c), 1.0) - Complex{0.0, 3.0}) < 1e-15);
}

TEST_CASE("functionals of the zero field vanish") {
  MatrixField f({-1.0, 1.0, 11, 0.0, 1.0, 3}, 2);
  for (auto tag : {Functional::trace_sq, Functional::frobenius, Functional::trace}) {
    const ConservedSeries s = functional_series(f, tag);
    REQUIRE(s.value.size() == 3);
    for (const Complex& v : s.value) CHECK(v == Complex{});
    CHECK(s.drift == 0.0);
  }
}

TEST_CASE("scalar sech: int v^2 dx = 2k, conserved") {
  Scenario s = scalar_soliton(1.0, 1.0);
  s.grid = {-35.0, 35.0, 1401, -5.0, 5.0, 11};
  const MatrixField f = evaluate(s);
  const ConservedSeries tsq = functional_series(f, Functional::trace_sq);
  CHECK(tsq.drift <= 1e-6);
  for (const Complex& v : tsq.value) CHECK(std::abs(v - 2.0) <= 2e-6);
  const ConservedSeries fro = functional_series(f, Functional::frobenius);
  CHECK(std::abs(fro.value[3] - tsq.value[3]) < 1e-12);
  // int sech = pi
  CHECK(std::abs(functional_series(f, Functional::trace).value[0] - M_PI) <= 1e-6);

  const Scenario k2 = [] {
    Scenario t = scalar_soliton(2.0, 1.0);
    t.grid = {-35.0, 35.0, 2801, -1.0, 1.0, 5};
    return t;
  }();
  for (const Complex& v : functional_series(evaluate(k2), Functional::trace_sq).value) CHECK(std::abs(v - 4.0) <= 4e-6);
}

TEST_CASE("window and mask errors") {
  const MatrixField narrow = evaluate(scalar_soliton(1.0, 1.0));  // [-10, 10] is not decayed to 1e-8
  try {
    functional_series(narrow, Functional::frobenius);
    FAIL("expected WindowError");
  } catch (const WindowError& e) {
    CHECK(std::string(e.what()).find("window too small") != std::string::npos);
  }

  // Poles on x + t = 0 hit the x grid on every other t slice.
  Scenario pole;
  pole.entries = {{1.0, ComplexMatrix{{2.0}}}};
  pole.grid = {-25.0, 25.0, 501, -1.0, 1.0, 9};
  const MatrixField fp = evaluate(pole);
  REQUIRE(fp.masked_count() > 0);
  CHECK_THROWS_AS(functional_series(fp, Functional::frobenius, {1e-8, false}), Error);
  const ConservedSeries skipped = functional_series(fp, Functional::frobenius, {1e-8, true});
  CHECK(skipped.skipped_t.size() == 5);
  CHECK(skipped.t.size() == 4);
}

TEST_CASE("energy partition") {
  Scenario fig2 = two_soliton(caption_fig2());
  fig2.grid = {-40.0, 30.0, 701, -3.0, 3.0, 13};
  const MatrixField f2 = evaluate(fig2);
  REQUIRE(f2.masked_count() == 0);
  const EnergyPartition p2 = energy_partition(f2);
  const ConservedSeries fro = functional_series(f2, Functional::frobenius);
  for (std::size_t k = 0; k < p2.t.size(); ++k) {
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j)
        if (i != j) CHECK(p2.entry(k, i, j) <= 1e-20);
    CHECK(std::abs(p2.total(k) - fro.value[k].real()) <= 1e-10 * fro.value[k].real());
    CHECK(p2.entry(k, 0, 0) == doctest::Approx(p2.entry(k, 2, 2)).epsilon(1e-12));
  }

  Scenario fig4 = two_soliton(caption_fig4());
  fig4.grid = {-40.0, 30.0, 701, -3.0, 3.0, 13};
  const MatrixField f4 = evaluate(fig4);
  const EnergyPartition p4 = energy_partition(f4, {1e-8, true});
  REQUIRE_FALSE(p4.t.empty());
  double max13 = 0.0;
  for (std::size_t k = 0; k < p4.t.size(); ++k) max13 = std::max(max13, p4.entry(k, 0, 2));
  CHECK(max13 > 1e-6);
  for (std::size_t k = 0; k < p4.t.size(); ++k)
    for (std::size_t e = 0; e < 9; ++e) CHECK(p4.entries[k][e] >= 0.0);
}

TEST_CASE("diagonal scenario diagnostics equal the scalar ones") {
  Scenario fig2 = two_soliton(caption_fig2());
  fig2.grid = {-40.0, 30.0, 701, -3.0, 3.0, 13};
  Scenario scalar = scalar_two_soliton();
  scalar.grid = fig2.grid;
  const EnergyPartition p2 = energy_partition(evaluate(fig2));
  const EnergyPartition ps = energy_partition(evaluate(scalar));
  for (std::size_t k = 0; k < p2.t.size(); ++k) {
    CHECK(std::abs(p2.entry(k, 0, 0) - ps.entry(k, 0, 0)) <= 1e-8);
    CHECK(std::abs(p2.entry(k, 2, 2) - ps.entry(k, 0, 0)) <= 1e-8);
  }
}

TEST_CASE("peak tracking: one soliton") {
  const MatrixField f = evaluate(scalar_soliton(1.0, 1.0));
  const PeakTrack tr = track_peaks(f, 0.1, 1);
  CHECK(tr.warnings.empty());
  REQUIRE(tr.solitons.size() == 1);
  CHECK(tr.solitons[0].speed_pre == doctest::Approx(-1.0).epsilon(0.02));
  CHECK(tr.solitons[0].speed_post == doctest::Approx(-1.0).epsilon(0.02));
  CHECK(tr.solitons[0].height_pre == doctest::Approx(1.0).epsilon(0.01));
  // Peak of sech(x + t - ln 2) at t = 0.
  const auto peaks = slice_peaks(f, 50, 0.1);
  REQUIRE(peaks.size() == 1);
  CHECK(peaks[0].x == doctest::Approx(std::log(2.0)).epsilon(1e-3));
}

TEST_CASE("peak tracking: elastic two-soliton collision") {
  const PeakTrack tr = track_peaks(evaluate(scalar_two_soliton()), 0.1, 2);
  CHECK(tr.warnings.empty());
  REQUIRE(tr.solitons.size() == 2);
  const double speeds[] = {-4.0, -1.0};
  const double heights[] = {2.0, 1.0};
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(tr.solitons[k].speed_pre == doctest::Approx(speeds[k]).epsilon(0.02));
    CHECK(tr.solitons[k].speed_post == doctest::Approx(speeds[k]).epsilon(0.02));
    CHECK(tr.solitons[k].height_post == doctest::Approx(tr.solitons[k].height_pre).epsilon(0.01));
    CHECK(tr.solitons[k].height_pre == doctest::Approx(heights[k]).epsilon(0.01));
  }
}

TEST_CASE("peak tracking reports missing peaks as warnings") {
  const PeakTrack tr = track_peaks(evaluate(scalar_soliton(1.0, 1.0)), 0.1, 2);
  CHECK_FALSE(tr.warnings.empty());
  MatrixField tiny({0.0, 1.0, 2, 0.0, 1.0, 2}, 1);
  CHECK_THROWS_AS(track_peaks(tiny, 0.1), Error);
}
