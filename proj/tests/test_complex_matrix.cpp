#include "doctest.h"
#include "matsol/complex_matrix.hpp"
#include "matsol/errors.hpp"
#include "test_support.hpp"

using namespace matsol;
using namespace matsol::testing;

namespace {
const Complex I{0.0, 1.0};
}

TEST_CASE("mat_mul: identity, nilpotent square, triple-loop oracle") {
  std::mt19937_64 rng(11);
  const ComplexMatrix m = random_matrix(rng, 3, 3);
  CHECK(mat_mul(ComplexMatrix::identity(3), m) == m);

  const ComplexMatrix nil{{0.0, 1.0}, {0.0, 0.0}};
  CHECK(mat_mul(nil, nil) == ComplexMatrix::zeros(2, 2));

  const ComplexMatrix a = random_matrix(rng, 4, 4), b = random_matrix(rng, 4, 4);
  const ComplexMatrix c = mat_mul(a, b), ref = naive_product(a, b);
  for (std::size_t i = 0; i < c.size(); ++i)
    CHECK(std::abs(c.data()[i] - ref.data()[i]) <= 1e-14 * std::abs(ref.data()[i]) + 1e-300);

  const ComplexMatrix r = random_matrix(rng, 2, 5);
  CHECK(mat_mul(r, random_matrix(rng, 5, 3)).rows() == 2);
  CHECK_THROWS_AS(mat_mul(r, r), DimensionError);
}

TEST_CASE("determinant: identity, diagonal, cofactor oracle") {
  CHECK(determinant(ComplexMatrix::identity(4)) == Complex{1.0, 0.0});
  const Complex diag[] = {2.0, 3.0 * I};
  CHECK(std::abs(determinant(ComplexMatrix::diagonal(diag)) - 6.0 * I) < 1e-15);

  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const ComplexMatrix a = random_matrix(rng, 3, 3);
    const Complex ref = cofactor_det(a);
    CHECK(std::abs(determinant(a) - ref) <= 1e-13 * std::abs(ref));
  }
  CHECK_THROWS_AS(determinant(random_matrix(rng, 2, 3)), DimensionError);
}

TEST_CASE("lu_det_solve: singular flag, solve error carries pivot") {
  const ComplexMatrix sing{{1.0, 2.0}, {2.0, 4.0}};
  const auto r = lu_det_solve(sing);
  CHECK(r.singular);
  CHECK(std::abs(r.det) < 1e-15);
  CHECK_FALSE(r.solution.has_value());
  try {
    lu_det_solve(sing, ComplexMatrix::identity(2));
    FAIL("expected SingularMatrixError");
  } catch (const SingularMatrixError& e) {
    CHECK(e.pivot_magnitude() < 1e-12);
  }
  CHECK_THROWS_AS(lu_det_solve(ComplexMatrix::identity(2), ComplexMatrix(3, 1)), DimensionError);

  // Threshold is relative to the input scale.
  ComplexMatrix tiny = ComplexMatrix::identity(3);
  tiny *= 1e-200;
  CHECK_FALSE(lu_det_solve(tiny).singular);
}

TEST_CASE("property: det(AB) = det(A) det(B) up to 6x6") {
  std::mt19937_64 rng(13);
  for (std::size_t n = 1; n <= 6; ++n) {
    for (int trial = 0; trial < 10; ++trial) {
      const ComplexMatrix a = random_matrix(rng, n, n), b = random_matrix(rng, n, n);
      const Complex lhs = determinant(mat_mul(a, b));
      const Complex rhs = determinant(a) * determinant(b);
      CHECK(std::abs(lhs - rhs) <= 1e-12 * std::abs(rhs));
    }
  }
}

TEST_CASE("property: solve residual for well-conditioned 6x6") {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 20; ++trial) {
    ComplexMatrix a = random_matrix(rng, 6, 6, 0.1);
    a += ComplexMatrix::identity(6);
    const ComplexMatrix rhs = random_matrix(rng, 6, 2);
    const auto r = lu_det_solve(a, rhs);
    REQUIRE(r.solution);
    CHECK(frobenius_norm(mat_mul(a, *r.solution) - rhs) <= 1e-12 * frobenius_norm(rhs));
  }
}

TEST_CASE("expm: zero, nilpotent, Taylor oracle, diagonal fast path") {
  CHECK(expm(ComplexMatrix::zeros(3, 3)) == ComplexMatrix::identity(3));

  const ComplexMatrix e = expm(ComplexMatrix{{0.0, 1.0}, {0.0, 0.0}});
  CHECK(max_abs_diff(e, ComplexMatrix{{1.0, 1.0}, {0.0, 1.0}}) < 1e-15);

  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 20; ++trial) {
    const ComplexMatrix a = random_with_norm(rng, 3, 1.0);
    CHECK(max_abs_diff(expm(a), taylor_expm(a)) <= 1e-12);
  }

  const Complex diag[] = {Complex{1.0, 2.0}, Complex{-3.0, 0.5}};
  const ComplexMatrix ed = expm(ComplexMatrix::diagonal(diag));
  CHECK(ed(0, 0) == std::exp(diag[0]));
  CHECK(ed(1, 1) == std::exp(diag[1]));
  CHECK(ed(0, 1) == Complex{});

  const Complex big[] = {Complex{800.0, 0.0}};
  try {
    expm(ComplexMatrix::diagonal(big));
    FAIL("expected OverflowError");
  } catch (const OverflowError& err) {
    CHECK(err.exponent_scale() == doctest::Approx(800.0));
  }
  ComplexMatrix huge{{800.0, 1.0}, {0.0, 1.0}};
  CHECK_THROWS_AS(expm(huge), OverflowError);
  CHECK_THROWS_AS(expm(ComplexMatrix(2, 3)), DimensionError);
}

TEST_CASE("property: expm(A) expm(-A) = I and the one-parameter group law") {
  std::mt19937_64 rng(16);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + trial % 4;
    const ComplexMatrix a = random_with_norm(rng, n, 2.0);
    ComplexMatrix neg = a;
    neg *= -1.0;
    CHECK(max_abs_diff(mat_mul(expm(a), expm(neg)), ComplexMatrix::identity(n)) <= 1e-11);

    const double x = u(rng), y = u(rng);
    const ComplexMatrix lhs = expm((x + y) * a);
    const ComplexMatrix rhs = mat_mul(expm(x * a), expm(y * a));
    CHECK(max_abs_diff(lhs, rhs) <= 1e-11);
  }
}

TEST_CASE("anticommutator and commutator") {
  std::mt19937_64 rng(17);
  const ComplexMatrix s = random_matrix(rng, 3, 3), t = random_matrix(rng, 3, 3);
  CHECK(max_abs_diff(anticommutator(ComplexMatrix::identity(3), s), 2.0 * s) < 1e-15);
  CHECK(sup_norm(anticommutator(t, s) - anticommutator(s, t)) == 0.0);

  const Complex d1[] = {1.0, 2.0, Complex{0.0, 3.0}}, d2[] = {-1.0, 5.0, 7.0};
  CHECK(sup_norm(commutator(ComplexMatrix::diagonal(d1), ComplexMatrix::diagonal(d2))) == 0.0);
  CHECK_THROWS_AS(commutator(s, random_matrix(rng, 2, 2)), DimensionError);
}

TEST_CASE("numerical_rank") {
  CHECK(numerical_rank(ComplexMatrix::identity(4)) == 4);
  CHECK(numerical_rank(ComplexMatrix::zeros(3, 3)) == 0);
  CHECK(numerical_rank(ComplexMatrix{{1.0, 2.0, 3.0}, {2.0, 4.0, 6.0}}) == 1);
  std::mt19937_64 rng(18);
  const ComplexMatrix u = random_matrix(rng, 5, 2), v = random_matrix(rng, 2, 5);
  CHECK(numerical_rank(mat_mul(u, v)) == 2);
}
