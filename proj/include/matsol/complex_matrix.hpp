#pragma once

// Dense complex linear algebra for the small matrices (n <= ~12) that the
// soliton construction produces. Row-major storage, value semantics.

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <vector>

namespace matsol {

using Complex = std::complex<double>;

class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(std::size_t rows, std::size_t cols);
  ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries);
  ComplexMatrix(std::initializer_list<std::initializer_list<Complex>> rows);

  static ComplexMatrix identity(std::size_t n);
  static ComplexMatrix zeros(std::size_t rows, std::size_t cols) { return {rows, cols}; }
  static ComplexMatrix diagonal(std::span<const Complex> diag);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return a_.size(); }
  bool is_square() const noexcept { return rows_ == cols_; }
  bool empty() const noexcept { return a_.empty(); }

  Complex& operator()(std::size_t r, std::size_t c) noexcept { return a_[r * cols_ + c]; }
  const Complex& operator()(std::size_t r, std::size_t c) const noexcept {
    return a_[r * cols_ + c];
  }

  std::span<Complex> row(std::size_t r) noexcept { return {a_.data() + r * cols_, cols_}; }
  std::span<const Complex> row(std::size_t r) const noexcept {
    return {a_.data() + r * cols_, cols_};
  }
  std::span<Complex> data() noexcept { return a_; }
  std::span<const Complex> data() const noexcept { return a_; }

  ComplexMatrix& operator+=(const ComplexMatrix& o);
  ComplexMatrix& operator-=(const ComplexMatrix& o);
  ComplexMatrix& operator*=(Complex s) noexcept;

  friend bool operator==(const ComplexMatrix&, const ComplexMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Complex> a_;
};

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator*(Complex s, ComplexMatrix a);
ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);

/// Matrix product; throws DimensionError unless a.cols() == b.rows().
ComplexMatrix mat_mul(const ComplexMatrix& a, const ComplexMatrix& b);

/// {t, s} = ts + st
ComplexMatrix anticommutator(const ComplexMatrix& t, const ComplexMatrix& s);
/// [t, s] = ts - st
ComplexMatrix commutator(const ComplexMatrix& t, const ComplexMatrix& s);

ComplexMatrix transpose(const ComplexMatrix& a);

double sup_norm(const ComplexMatrix& a) noexcept;        // max |a_ij|
double inf_norm(const ComplexMatrix& a) noexcept;        // max row sum
double frobenius_norm(const ComplexMatrix& a) noexcept;
bool all_finite(const ComplexMatrix& a) noexcept;
bool is_diagonal(const ComplexMatrix& a) noexcept;

/// Relative pivot threshold: a pivot is numerically zero when
/// |pivot| <= kSingularPivotRatio * inf_norm(input).
inline constexpr double kSingularPivotRatio = 1e-13;

/// LU factorization with partial pivoting, PA = LU.
class LUDecomposition {
 public:
  explicit LUDecomposition(ComplexMatrix a);

  std::size_t order() const noexcept { return lu_.rows(); }
  Complex determinant() const noexcept;
  bool singular() const noexcept { return singular_; }
  /// Smallest pivot magnitude met during elimination.
  double min_pivot() const noexcept { return min_pivot_; }
  double threshold() const noexcept { return threshold_; }

  /// Solves A X = rhs. Throws SingularMatrixError when singular().
  ComplexMatrix solve(const ComplexMatrix& rhs) const;
  /// Solves the same system without the singularity check; exact-zero
  /// pivots still throw. For callers that guard conditioning themselves.
  ComplexMatrix solve_unchecked(const ComplexMatrix& rhs) const;

 private:
  ComplexMatrix lu_;
  std::vector<std::size_t> perm_;
  int sign_ = 1;
  bool singular_ = false;
  double min_pivot_ = 0.0;
  double threshold_ = 0.0;
};

struct DetSolveResult {
  Complex det;
  bool singular = false;
  double min_pivot = 0.0;
  std::optional<ComplexMatrix> solution;
};

/// Determinant (and optionally the solution of a x = rhs) via partial-pivot
/// LU. A singular matrix yields its (tiny or zero) determinant with the
/// `singular` flag set; only the solve request on it throws.
DetSolveResult lu_det_solve(const ComplexMatrix& a,
                            const std::optional<ComplexMatrix>& rhs = std::nullopt);

Complex determinant(const ComplexMatrix& a);

/// Matrix exponential. Diagonal input takes the entrywise path; anything
/// else uses scaling and squaring with the (6,6) Pade approximant.
/// Throws OverflowError when the result leaves double range.
ComplexMatrix expm(const ComplexMatrix& a);

/// Numerical rank by Gaussian elimination with complete pivoting: pivots
/// below rel_tol * max|a_ij| count as zero.
std::size_t numerical_rank(const ComplexMatrix& a, double rel_tol = 1e-12);

}  // namespace matsol
