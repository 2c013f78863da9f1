#include <cmath>
#include <limits>

#include "doctest.h"
#include "matsol/errors.hpp"
#include "matsol/pde_verify.hpp"
#include "test_support.hpp"

using namespace matsol;
using namespace matsol::testing;

namespace {

Sampler zero_field(std::size_t d) {
  return [d](EvalPoint) { return ComplexMatrix(d, d); };
}

Sampler constant_field(Complex c) {
  return [c](EvalPoint) { return ComplexMatrix{{c}}; };
}

Sampler scaled(Sampler f, double a) {
  return [f, a](EvalPoint p) { return a * f(p); };
}

// sech z and its derivatives: s' = -s T, s''' = -s T (1 - 6 s^2).
double sech(double z) { return 1.0 / std::cosh(z); }
double sech_dx(double z) { return -sech(z) * std::tanh(z); }

const double kTheta = std::log(2.0);  // k = 1, beta = 1

std::vector<EvalPoint> uniform_points(const GridSpec& g, std::size_t n, std::uint64_t seed) {
  return sample_points(g, n, seed, [](EvalPoint) { return true; });
}

Scenario scalar_two_soliton(double beta) {
  Scenario s;
  s.d = 1;
  s.entries = {{1.0, ComplexMatrix{{beta}}}, {2.0, ComplexMatrix{{beta}}}};
  s.grid = {-30.0, 30.0, 1201, -4.0, 4.0, 161};
  s.options.imaginary_weights = true;
  return s;
}

}  // namespace

TEST_CASE("stencil validation") {
  CHECK_THROWS_AS(check_stencil({0.0, 4, false}), Error);
  CHECK_THROWS_AS(check_stencil({1e-2, 3, false}), Error);
  CHECK_NOTHROW(check_stencil({1e-2, 6, true}));
  CHECK(stencil_reach_x({1e-2, 4, false}) == 3);
  CHECK(stencil_reach_t({1e-2, 6, false}) == 3);
}

TEST_CASE("zero field: every derivative and residual vanishes exactly") {
  const StencilSpec s;
  const Derivatives d = sample_derivatives(zero_field(2), {0.3, 0.1}, s);
  for (const auto* m : {&d.v, &d.vx, &d.vxx, &d.vxxx, &d.vt}) CHECK(sup_norm(*m) == 0.0);
  CHECK(sup_norm(mkdv_residual(zero_field(2), {0.0, 0.0}, s)) == 0.0);
  CHECK(sup_norm(miura_map(zero_field(2), {0.0, 0.0}, s)) == 0.0);
  CHECK(sup_norm(kdv_residual(zero_field(2), {0.0, 0.0}, s)) == 0.0);
  CHECK(sup_norm(pkdv_residual(zero_field(2), {0.0, 0.0}, s)) == 0.0);

  // Decayed region of a real scenario.
  const OperatorData od = build_operator_data(scalar_soliton(1.0, 1.0));
  const Derivatives far = sample_derivatives(od, {-40.0, 0.0}, s);
  for (const auto* m : {&far.v, &far.vx, &far.vxx, &far.vxxx, &far.vt}) CHECK(sup_norm(*m) < 1e-10);
}

TEST_CASE("sample_derivatives on the sech soliton") {
  const OperatorData od = build_operator_data(scalar_soliton(1.0, 1.0));
  const StencilSpec s;
  // Peak of sech(x + t - theta).
  CHECK(std::abs(sample_derivatives(od, {kTheta - 0.5, 0.5}, s).vx(0, 0)) < 1e-7);

  const EvalPoint p{0.9, 0.2};
  const double z = p.x + p.t - kTheta;
  double err[2];
  int n = 0;
  for (double h : {0.04, 0.02}) {
    const Derivatives d = sample_derivatives(od, p, {h, 4, false});
    err[n++] = std::abs(d.vx(0, 0) - sech_dx(z));
  }
  CHECK(err[0] / err[1] == doctest::Approx(16.0).epsilon(0.3));

  // Richardson raises the accuracy well beyond the plain stencil.
  const double plain = std::abs(sample_derivatives(od, p, {0.04, 4, false}).vx(0, 0) - sech_dx(z));
  const double rich = std::abs(sample_derivatives(od, p, {0.04, 4, true}).vx(0, 0) - sech_dx(z));
  CHECK(rich < plain / 10.0);
}

TEST_CASE("masked stencil nodes raise StencilError") {
  Scenario s = scalar_soliton(1.0, 1.0);
  s.options.imaginary_weights = false;
  s.entries[0].weight = ComplexMatrix{{2.0}};  // singular at x + t = 0
  const OperatorData od = build_operator_data(s);
  CHECK_THROWS_AS(sample_derivatives(od, {0.02, 0.0}, StencilSpec{}), StencilError);
  CHECK_THROWS_AS(sample_derivatives(od, {500.0, 0.0}, StencilSpec{}), StencilError);
}

TEST_CASE("mKdV residual: sech preset, detector sensitivity") {
  const Scenario sc = scalar_soliton(1.0, 1.0);
  const OperatorData od = build_operator_data(sc);
  const auto pts = uniform_points(sc.grid, 100, 41);
  const ResidualReport r = residual_report(mkdv_operator(od), pts, StencilSpec{});
  CHECK(r.samples == 100);
  CHECK(r.sup <= 1e-6);
  CHECK(r.rms <= r.sup);

  const ResidualReport bad = residual_report(mkdv_operator(scaled(soliton_sampler(od), 1.01)), pts, StencilSpec{});
  CHECK(bad.sup > 1e-3);
}

TEST_CASE("mKdV residual on fig3 at discretization level") {
  // k = 2 makes the t-derivative truncation error of order h^4 k^15; at
  // h = 2.5e-3 it sits well below 1e-5 everywhere.
  const Scenario sc = two_soliton(caption_fig3());
  const OperatorData od = build_operator_data(sc);
  const StencilSpec s{2.5e-3, 4, false};
  const ResidualOperator op = mkdv_operator(od);
  const auto pts = sample_points(sc.grid, 25, 42, stencil_clear(op, s));
  CHECK(residual_report(op, pts, s).sup <= 1e-5);
}

TEST_CASE("Miura map and KdV residual") {
  const Scenario sc = scalar_soliton(1.0, 1.0);
  const OperatorData od = build_operator_data(sc);
  const StencilSpec s;

  // u = i v_x + v^2 against the closed form.
  const EvalPoint p{0.4, -0.3};
  const double z = p.x + p.t - kTheta;
  const Complex expected{sech(z) * sech(z), sech_dx(z)};
  CHECK(std::abs(miura_map(od, p, s)(0, 0) - expected) < 1e-8);

  const auto pts = uniform_points(sc.grid, 25, 43);
  CHECK(residual_report(kdv_operator(od, 1), pts, s).sup <= 1e-5);

  // For real v the two branches are complex conjugates of each other, so both
  // signs pass and the printed sign is kept.
  const MiuraProbe probe = probe_miura_sign(od, pts, s);
  CHECK(probe.plus_valid);
  CHECK(probe.minus_valid);
  CHECK(probe.selected == 1);
  CHECK(probe.sup_plus == doctest::Approx(probe.sup_minus).epsilon(1e-6));
}

TEST_CASE("KdV residual of fig2 decouples into the scalar run") {
  const OperatorData fig2 = build_operator_data(two_soliton(caption_fig2()));
  const OperatorData scalar = build_operator_data(scalar_two_soliton(1.0));
  const StencilSpec s;
  for (const EvalPoint p : {EvalPoint{-3.0, 0.5}, EvalPoint{0.5, -0.2}, EvalPoint{2.0, 1.0}}) {
    const ComplexMatrix m = kdv_residual(miura_sampler(soliton_sampler(fig2), s), p, s);
    const Complex v = kdv_residual(miura_sampler(soliton_sampler(scalar), s), p, s)(0, 0);
    CHECK(std::abs(m(0, 0) - v) <= 1e-8);
    CHECK(std::abs(m(2, 2) - v) <= 1e-8);
    CHECK(std::abs(m(1, 1)) == 0.0);
  }
}

TEST_CASE("potential map") {
  const Scenario sc = scalar_soliton(1.0, 1.0);
  const OperatorData od = build_operator_data(sc);
  const StencilSpec s;
  const Sampler u = miura_sampler(soliton_sampler(od), s);
  const QuadratureSpec q;

  CHECK(sup_norm(potential_map(u, 0.0, -40.0, -40.0, q)) == 0.0);
  CHECK_THROWS_AS(potential_map(u, 0.0, 0.0, 1.0, q), WindowError);
  const double cut = find_decay_cut(u, {-5.0, 5.0}, -10.0, q);
  CHECK(cut <= -10.0);
  CHECK(sup_norm(u({cut, 5.0})) < q.decay_tol);

  // Total mass of u is 2 (the i v_x part integrates to zero) at every t.
  const Complex m1 = potential_map(u, -5.0, -40.0, 40.0, q)(0, 0);
  const Complex m2 = potential_map(u, 5.0, -40.0, 40.0, q)(0, 0);
  CHECK(std::abs(m1 - m2) <= 1e-6);
  CHECK(std::abs(m1 - 2.0) <= 1e-6);

  // W_x reproduces U.
  const QuadratureSpec fine{1e-3, 1e-10};
  const Sampler w = potential_sampler(u, -40.0, fine);
  for (double x : {-2.0, 0.5, 3.0}) {
    const Derivatives d = sample_derivatives(w, {x, 0.3}, s);
    CHECK(sup_norm(d.vx - u({x, 0.3})) <= 1e-7);
  }
}

TEST_CASE("pKdV residual: constant, scalar preset, sensitivity") {
  const StencilSpec s;
  CHECK(sup_norm(pkdv_residual(constant_field({2.0, -1.0}), {0.0, 0.0}, s)) == 0.0);

  const Scenario sc = scalar_soliton(1.0, 1.0);
  const OperatorData od = build_operator_data(sc);
  const auto pts = uniform_points(sc.grid, 10, 44);
  CHECK(residual_report(pkdv_operator(od, 1, QuadratureSpec{}), pts, s).sup <= 1e-4);

  const Sampler u = miura_sampler(soliton_sampler(od), s);
  const Sampler w = potential_sampler(u, -40.0, QuadratureSpec{});
  double good = 0.0, bad = 0.0;
  for (const auto& p : pts) {
    good = std::max(good, sup_norm(pkdv_residual(w, u, p, s)));
    bad = std::max(bad, sup_norm(pkdv_residual(scaled(w, 1.01), u, p, s)));
  }
  CHECK(good <= 1e-4);
  CHECK(bad > 1e-3);
}

TEST_CASE("convergence study: slopes and the roundoff floor") {
  const Scenario sc = scalar_soliton(1.0, 1.0);
  const OperatorData od = build_operator_data(sc);
  const ResidualOperator op = mkdv_operator(od);
  const auto pts = uniform_points({-4.0, 4.0, 2, -1.0, 1.0, 2}, 10, 45);

  const ResidualReport r4 = convergence_study(op, pts, {4e-2, 2e-2, 1e-2}, StencilSpec{});
  REQUIRE(r4.slope);
  CHECK(*r4.slope >= 3.3);
  CHECK(*r4.slope <= 4.7);
  CHECK_FALSE(r4.roundoff_limited);
  CHECK(r4.halving_ratios.size() == 2);
  CHECK(r4.steps.size() == 3);

  const ResidualReport r2 = convergence_study(op, pts, {4e-2, 2e-2, 1e-2}, {1e-2, 2, false});
  REQUIRE(r2.slope);
  CHECK(*r2.slope >= 1.5);
  CHECK(*r2.slope <= 2.5);

  const ResidualReport tiny = convergence_study(op, pts, {1e-4, 5e-5}, StencilSpec{});
  CHECK(tiny.roundoff_limited);
  CHECK_FALSE(tiny.slope);

  CHECK_THROWS_AS(convergence_study(op, pts, {1e-2}, StencilSpec{}), Error);
}

TEST_CASE("noise scale: |V| for samplers, route gap for scenarios") {
  std::mt19937_64 rng(11);
  Scenario sc = random_scenario(rng, 2, 2);
  const OperatorData od = build_operator_data(sc);
  const Sampler v = soliton_sampler(od);
  const ResidualOperator bare = mkdv_operator(v);
  const ResidualOperator full = mkdv_operator(od);
  const double eps = std::numeric_limits<double>::epsilon();
  for (const EvalPoint p : {EvalPoint{-1.0, 0.2}, EvalPoint{0.5, -0.3}, EvalPoint{2.0, 0.0}}) {
    const PointResult a = try_evaluate_point(od, p, EvalPath::fast);
    if (a.state != PointState::regular) continue;
    const ComplexMatrix b = evaluate_point_det(od, p);
    CHECK(bare.noise_scale(p) == sup_norm(a.value));
    CHECK(full.noise_scale(p) == std::max(sup_norm(a.value), sup_norm(a.value - b) / eps));
  }
}

TEST_CASE("residual_report is deterministic and rejects all-masked input") {
  const Scenario sc = scalar_soliton(1.0, 1.0);
  const OperatorData od = build_operator_data(sc);
  const auto pts = uniform_points(sc.grid, 20, 46);
  const ResidualReport a = residual_report(mkdv_operator(od), pts, StencilSpec{});
  const ResidualReport b = residual_report(mkdv_operator(od), pts, StencilSpec{});
  CHECK(a.sup == b.sup);
  CHECK(a.rms == b.rms);
  CHECK(a.worst.x == b.worst.x);

  const std::vector<EvalPoint> far{{400.0, 0.0}, {500.0, 0.0}};
  CHECK_THROWS_AS(residual_report(mkdv_operator(od), far, StencilSpec{}), Error);
}
