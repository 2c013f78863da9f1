#include "matsol/soliton.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "matsol/errors.hpp"

namespace matsol {

namespace {

const Complex kI{0.0, 1.0};

// Per-row exponents k_m x + k_m^3 t, repeated d times.
std::vector<Complex> exponents(const OperatorData& od, EvalPoint p) {
  std::vector<Complex> z(od.order());
  for (std::size_t m = 0; m < od.n; ++m) {
    const Complex k = od.k[m];
    const Complex v = k * p.x + k * k * k * p.t;
    for (std::size_t r = 0; r < od.d; ++r) z[m * od.d + r] = v;
  }
  return z;
}

void check_overflow(const OperatorData& od, EvalPoint p) {
  const double mx = max_exponent(od, p);
  if (!(mx <= kOverflowExponent)) {
    std::ostringstream os;
    os << "exponential overflow at (x, t) = (" << p.x << ", " << p.t << "): Re(kx + k^3 t) = " << mx;
    throw OverflowError(os.str(), mx);
  }
}

// exp(k_n x + k_n^3 t) for every reduced row.
std::vector<Complex> reduced_exp(const OperatorData& od, EvalPoint p) {
  check_overflow(od, p);
  std::vector<Complex> e(od.reduced.rank);
  for (std::size_t r = 0; r < e.size(); ++r) {
    const Complex k = od.k[od.reduced.block[r]];
    e[r] = std::exp(k * p.x + k * k * k * p.t);
  }
  return e;
}

// I + s i diag(e) K in reduced coordinates.
ComplexMatrix shifted(const OperatorData& od, const std::vector<Complex>& e, double s) {
  const std::size_t n = od.reduced.rank;
  const ComplexMatrix& kernel = od.reduced.kernel;
  ComplexMatrix m(n, n);
  const Complex f = s * kI;
  for (std::size_t r = 0; r < n; ++r) {
    const Complex fr = f * e[r];
    for (std::size_t c = 0; c < n; ++c) m(r, c) = fr * kernel(r, c);
    m(r, r) += 1.0;
  }
  return m;
}

std::vector<double> row_scales(const ComplexMatrix& m) {
  std::vector<double> s(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    double acc = 0.0;
    for (const auto& v : m.row(r)) acc += std::norm(v);
    s[r] = 1.0 / std::max(1.0, std::sqrt(acc));
  }
  return s;
}

ComplexMatrix scale_rows(ComplexMatrix m, const std::vector<double>& s) {
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (auto& v : m.row(r)) v *= s[r];
  return m;
}

// phi = diag(e) right, the reduced image of E C.
ComplexMatrix phi_matrix(const OperatorData& od, const std::vector<Complex>& e) {
  ComplexMatrix phi = od.reduced.right;
  for (std::size_t r = 0; r < phi.rows(); ++r)
    for (auto& v : phi.row(r)) v *= e[r];
  return phi;
}

[[noreturn]] void throw_singular(EvalPoint p, double dp, double dm) {
  std::ostringstream os;
  os << "singular point (x, t) = (" << p.x << ", " << p.t << "): scaled |det(I+iL)| = " << dp
     << ", |det(I-iL)| = " << dm;
  throw SingularPointError(os.str(), dp, dm);
}

}  // namespace

double max_exponent(const OperatorData& od, EvalPoint p) noexcept {
  double mx = -std::numeric_limits<double>::infinity();
  for (const Complex& k : od.k) mx = std::max(mx, (k * p.x + k * k * k * p.t).real());
  return mx;
}

ExponentialAction exponential_action(const OperatorData& od, EvalPoint p) {
  check_overflow(od, p);
  const auto z = exponents(od, p);
  ExponentialAction out;
  out.e = expm(ComplexMatrix::diagonal(z));
  out.l = mat_mul(out.e, od.b);
  out.phi = mat_mul(out.e, od.fact.c_matrix());
  return out;
}

ComplexMatrix evaluate_point_det(const OperatorData& od, EvalPoint p) {
  const auto e = reduced_exp(od, p);
  const std::size_t d = od.fact.count();
  if (od.reduced.rank == 0) return ComplexMatrix(d, d);
  const ComplexMatrix phi = phi_matrix(od, e);
  const ComplexMatrix& dm = od.reduced.left;

  // One row scaling per sign, shared by numerator and denominator so that the
  // ratio is unchanged while the determinants stay in range.
  Complex det0[2];
  std::vector<double> scales[2];
  double mag[2];
  for (int s = 0; s < 2; ++s) {
    const ComplexMatrix m = shifted(od, e, s == 0 ? 1.0 : -1.0);
    scales[s] = row_scales(m);
    det0[s] = determinant(scale_rows(m, scales[s]));
    mag[s] = std::abs(det0[s]);
  }
  if (!(std::min(mag[0], mag[1]) >= kSingularityThreshold)) throw_singular(p, mag[0], mag[1]);

  ComplexMatrix v(d, d);
  const std::size_t n = od.reduced.rank;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      Complex ratio[2];
      for (int s = 0; s < 2; ++s) {
        const double sg = s == 0 ? 1.0 : -1.0;
        ComplexMatrix m = shifted(od, e, sg);
        // + s i L_ij, L_ij = phi^(j) d^(i) as an operator
        for (std::size_t r = 0; r < n; ++r)
          for (std::size_t c = 0; c < n; ++c) m(r, c) += sg * kI * phi(r, j) * dm(i, c);
        ratio[s] = determinant(scale_rows(std::move(m), scales[s])) / det0[s];
      }
      v(i, j) = 0.5 * kI * (ratio[0] - ratio[1]);
    }
  }
  return v;
}

ComplexMatrix evaluate_point_fast(const OperatorData& od, EvalPoint p) {
  const auto e = reduced_exp(od, p);
  if (od.reduced.rank == 0) return ComplexMatrix(od.d, od.d);
  const ComplexMatrix plus = shifted(od, e, 1.0);
  const ComplexMatrix minus = shifted(od, e, -1.0);
  const auto sp = row_scales(plus);
  const auto sm = row_scales(minus);
  const LUDecomposition lu_plus(scale_rows(plus, sp));
  const LUDecomposition lu_minus(scale_rows(minus, sm));
  const double dp = std::abs(lu_plus.determinant());
  const double dm = std::abs(lu_minus.determinant());
  if (!(std::min(dp, dm) >= kSingularityThreshold)) throw_singular(p, dp, dm);

  // (I + L^2)^-1 = ((I + iL)^-1 + (I - iL)^-1) / 2, applied as two solves.
  const ComplexMatrix phi = phi_matrix(od, e);
  ComplexMatrix y = lu_plus.solve_unchecked(scale_rows(phi, sp));
  y += lu_minus.solve_unchecked(scale_rows(phi, sm));
  ComplexMatrix v = mat_mul(od.reduced.left, y);
  v *= -0.5;
  return v;
}

ComplexMatrix evaluate_point(const OperatorData& od, EvalPoint p, EvalPath path) {
  return path == EvalPath::det ? evaluate_point_det(od, p) : evaluate_point_fast(od, p);
}

PointResult try_evaluate_point(const OperatorData& od, EvalPoint p, EvalPath path) {
  PointResult r;
  try {
    r.value = evaluate_point(od, p, path);
    if (!all_finite(r.value)) {
      r.state = PointState::singular;
      r.value = ComplexMatrix{};
    }
  } catch (const SingularPointError& e) {
    r.state = PointState::singular;
    r.det_plus = e.det_plus();
    r.det_minus = e.det_minus();
  } catch (const OverflowError& e) {
    r.state = PointState::overflow;
    r.det_plus = e.exponent_scale();
  }
  return r;
}

}  // namespace matsol
