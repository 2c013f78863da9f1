#include "matsol/complex_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <utility>

#include "matsol/errors.hpp"

namespace matsol {

namespace {

std::string shape(const ComplexMatrix& m) {
  std::ostringstream os;
  os << m.rows() << "x" << m.cols();
  return os.str();
}

void require_square(const ComplexMatrix& a, const char* op) {
  if (!a.is_square()) {
    throw DimensionError(std::string(op) + ": matrix must be square, got " + shape(a));
  }
}

void require_same_shape(const ComplexMatrix& a, const ComplexMatrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape(a) + " vs " + shape(b));
  }
}

// ln(DBL_MAX)
constexpr double kMaxExpArgument = 709.78;

}  // namespace

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), a_(rows * cols) {}

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries)
    : rows_(rows), cols_(cols), a_(std::move(entries)) {
  if (a_.size() != rows_ * cols_) {
    throw DimensionError("ComplexMatrix: entry count does not match rows*cols");
  }
}

ComplexMatrix::ComplexMatrix(std::initializer_list<std::initializer_list<Complex>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  a_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw DimensionError("ComplexMatrix: ragged initializer");
    a_.insert(a_.end(), r.begin(), r.end());
  }
}

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
  ComplexMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

ComplexMatrix ComplexMatrix::diagonal(std::span<const Complex> diag) {
  ComplexMatrix m(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& o) {
  require_same_shape(*this, o, "operator+");
  for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& o) {
  require_same_shape(*this, o, "operator-");
  for (std::size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(Complex s) noexcept {
  for (auto& v : a_) v *= s;
  return *this;
}

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
ComplexMatrix operator*(Complex s, ComplexMatrix a) { return a *= s; }
ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) { return mat_mul(a, b); }

ComplexMatrix mat_mul(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("mat_mul: inner dimensions differ, " + shape(a) + " * " + shape(b));
  }
  ComplexMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto ci = c.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const Complex aik = a(i, k);
      if (aik == Complex{}) continue;
      auto bk = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) ci[j] += aik * bk[j];
    }
  }
  return c;
}

ComplexMatrix anticommutator(const ComplexMatrix& t, const ComplexMatrix& s) {
  require_square(t, "anticommutator");
  require_same_shape(t, s, "anticommutator");
  return mat_mul(t, s) + mat_mul(s, t);
}

ComplexMatrix commutator(const ComplexMatrix& t, const ComplexMatrix& s) {
  require_square(t, "commutator");
  require_same_shape(t, s, "commutator");
  return mat_mul(t, s) - mat_mul(s, t);
}

ComplexMatrix transpose(const ComplexMatrix& a) {
  ComplexMatrix r(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) r(j, i) = a(i, j);
  return r;
}

double sup_norm(const ComplexMatrix& a) noexcept {
  double m = 0.0;
  for (const auto& v : a.data()) m = std::max(m, std::abs(v));
  return m;
}

double inf_norm(const ComplexMatrix& a) noexcept {
  double m = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (const auto& v : a.row(i)) s += std::abs(v);
    m = std::max(m, s);
  }
  return m;
}

double frobenius_norm(const ComplexMatrix& a) noexcept {
  double s = 0.0;
  for (const auto& v : a.data()) s += std::norm(v);
  return std::sqrt(s);
}

bool all_finite(const ComplexMatrix& a) noexcept {
  return std::all_of(a.data().begin(), a.data().end(), [](const Complex& v) {
    return std::isfinite(v.real()) && std::isfinite(v.imag());
  });
}

bool is_diagonal(const ComplexMatrix& a) noexcept {
  if (!a.is_square()) return false;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j && a(i, j) != Complex{}) return false;
  return true;
}

LUDecomposition::LUDecomposition(ComplexMatrix a) : lu_(std::move(a)) {
  require_square(lu_, "LU");
  const std::size_t n = lu_.rows();
  perm_.resize(n);
  std::iota(perm_.begin(), perm_.end(), std::size_t{0});
  threshold_ = kSingularPivotRatio * inf_norm(lu_);
  min_pivot_ = n == 0 ? 0.0 : std::numeric_limits<double>::infinity();

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    double best = std::abs(lu_(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      const double v = std::abs(lu_(i, k));
      if (v > best) {
        best = v;
        p = i;
      }
    }
    if (p != k) {
      std::swap_ranges(lu_.row(k).begin(), lu_.row(k).end(), lu_.row(p).begin());
      std::swap(perm_[k], perm_[p]);
      sign_ = -sign_;
    }
    min_pivot_ = std::min(min_pivot_, best);
    if (best <= threshold_) singular_ = true;
    if (best == 0.0) continue;

    const Complex inv = 1.0 / lu_(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      const Complex f = lu_(i, k) * inv;
      lu_(i, k) = f;
      if (f == Complex{}) continue;
      for (std::size_t j = k + 1; j < n; ++j) lu_(i, j) -= f * lu_(k, j);
    }
  }
}

Complex LUDecomposition::determinant() const noexcept {
  Complex det = static_cast<double>(sign_);
  for (std::size_t i = 0; i < lu_.rows(); ++i) det *= lu_(i, i);
  return det;
}

ComplexMatrix LUDecomposition::solve(const ComplexMatrix& rhs) const {
  if (singular_) {
    throw SingularMatrixError("LU solve: matrix is numerically singular (min pivot " +
                                  std::to_string(min_pivot_) + ")",
                              min_pivot_);
  }
  return solve_unchecked(rhs);
}

ComplexMatrix LUDecomposition::solve_unchecked(const ComplexMatrix& rhs) const {
  const std::size_t n = lu_.rows();
  if (rhs.rows() != n) {
    throw DimensionError("LU solve: rhs has " + std::to_string(rhs.rows()) + " rows, expected " +
                         std::to_string(n));
  }
  if (min_pivot_ == 0.0 && n > 0) {
    throw SingularMatrixError("LU solve: exactly zero pivot", 0.0);
  }
  const std::size_t m = rhs.cols();
  ComplexMatrix x(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    auto src = rhs.row(perm_[i]);
    std::copy(src.begin(), src.end(), x.row(i).begin());
  }
  // forward substitution, unit lower triangle
  for (std::size_t i = 1; i < n; ++i) {
    auto xi = x.row(i);
    for (std::size_t k = 0; k < i; ++k) {
      const Complex l = lu_(i, k);
      if (l == Complex{}) continue;
      auto xk = x.row(k);
      for (std::size_t j = 0; j < m; ++j) xi[j] -= l * xk[j];
    }
  }
  for (std::size_t ii = n; ii-- > 0;) {
    auto xi = x.row(ii);
    for (std::size_t k = ii + 1; k < n; ++k) {
      const Complex u = lu_(ii, k);
      if (u == Complex{}) continue;
      auto xk = x.row(k);
      for (std::size_t j = 0; j < m; ++j) xi[j] -= u * xk[j];
    }
    const Complex inv = 1.0 / lu_(ii, ii);
    for (std::size_t j = 0; j < m; ++j) xi[j] *= inv;
  }
  return x;
}

DetSolveResult lu_det_solve(const ComplexMatrix& a, const std::optional<ComplexMatrix>& rhs) {
  LUDecomposition lu(a);
  DetSolveResult r;
  r.det = lu.determinant();
  r.singular = lu.singular();
  r.min_pivot = lu.min_pivot();
  if (rhs) r.solution = lu.solve(*rhs);
  return r;
}

Complex determinant(const ComplexMatrix& a) { return LUDecomposition(a).determinant(); }

ComplexMatrix expm(const ComplexMatrix& a) {
  require_square(a, "expm");
  const std::size_t n = a.rows();

  if (is_diagonal(a)) {
    ComplexMatrix r(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      const Complex z = a(i, i);
      if (z.real() > kMaxExpArgument) {
        throw OverflowError("expm: exp of diagonal entry with real part " +
                                std::to_string(z.real()) + " overflows",
                            z.real());
      }
      r(i, i) = std::exp(z);
    }
    return r;
  }

  // Scale so that ||a / 2^s||_inf <= 1/2, then square back.
  const double norm = inf_norm(a);
  if (!std::isfinite(norm)) throw OverflowError("expm: non-finite input", norm);
  int s = 0;
  if (norm > 0.5) s = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const ComplexMatrix x = std::ldexp(1.0, -s) * a;

  constexpr int p = 6;
  double c = 1.0;
  ComplexMatrix num = ComplexMatrix::identity(n);
  ComplexMatrix den = ComplexMatrix::identity(n);
  ComplexMatrix power = ComplexMatrix::identity(n);
  for (int k = 0; k < p; ++k) {
    c *= static_cast<double>(p - k) / static_cast<double>((k + 1) * (2 * p - k));
    power = mat_mul(power, x);
    const double sgn = (k % 2 == 0) ? -1.0 : 1.0;  // (-1)^(k+1)
    num += c * power;
    den += (sgn * c) * power;
  }
  ComplexMatrix r = LUDecomposition(den).solve(num);
  for (int i = 0; i < s; ++i) r = mat_mul(r, r);
  if (!all_finite(r)) {
    throw OverflowError("expm: result overflows (input norm " + std::to_string(norm) + ")", norm);
  }
  return r;
}

std::size_t numerical_rank(const ComplexMatrix& a, double rel_tol) {
  ComplexMatrix w = a;
  const std::size_t rows = w.rows();
  const std::size_t cols = w.cols();
  const double scale = sup_norm(w);
  if (scale == 0.0) return 0;
  const double tol = rel_tol * scale;
  std::vector<std::size_t> colperm(cols);
  std::iota(colperm.begin(), colperm.end(), std::size_t{0});

  std::size_t rank = 0;
  for (; rank < std::min(rows, cols); ++rank) {
    std::size_t pr = rank, pc = rank;
    double best = 0.0;
    for (std::size_t i = rank; i < rows; ++i)
      for (std::size_t j = rank; j < cols; ++j)
        if (std::abs(w(i, j)) > best) {
          best = std::abs(w(i, j));
          pr = i;
          pc = j;
        }
    if (best <= tol) break;
    std::swap_ranges(w.row(rank).begin(), w.row(rank).end(), w.row(pr).begin());
    for (std::size_t i = 0; i < rows; ++i) std::swap(w(i, rank), w(i, pc));
    const Complex inv = 1.0 / w(rank, rank);
    for (std::size_t i = rank + 1; i < rows; ++i) {
      const Complex f = w(i, rank) * inv;
      for (std::size_t j = rank; j < cols; ++j) w(i, j) -= f * w(rank, j);
    }
  }
  return rank;
}

}  // namespace matsol
