#pragma once

// Pointwise and grid evaluation of the d x d matrix mKdV solution
//
//   V_ij = (i/2) [ det(I + i(L + L_ij)) / det(I + iL)
//                - det(I - i(L + L_ij)) / det(I - iL) ],
//   L = exp(Ax + A^3 t) B,   L_ij = d^(i) (x) exp(Ax + A^3 t) c^(j).
//
// Two evaluation routes are provided. The determinant route evaluates the
// formula literally (2 d^2 + 2 determinants of order N d). The fast route uses
// the rank-one determinant identity, which collapses the formula to
//
//   V_ij = -(1/2) d^(i) [ (I + iL)^-1 + (I - iL)^-1 ] phi^(j).
//
// Both routes work in the reduced coordinates of ReducedForm (rank of the
// weights instead of N d), where Sylvester's identity keeps every determinant
// and solve equal to its full-size counterpart. Degenerate weights would
// otherwise make I + iL numerically singular once exp(kx) exceeds 1/eps.
// The two routes share the singularity guard and must agree at every
// unmasked point; tests check one against the other.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "matsol/complex_matrix.hpp"
#include "matsol/spectral.hpp"

namespace matsol {

struct EvalPoint {
  double x = 0.0;
  double t = 0.0;
};

/// Points with max_m Re(k_m x + k_m^3 t) above this are masked as overflow.
inline constexpr double kOverflowExponent = 300.0;

/// A point is singular when min over +/- of |det(R (I +- iL))| falls below
/// this, with I +- iL taken in reduced coordinates and R dividing every row
/// by max(1, its 2-norm). Rows that
/// grow with L are normalised (|det| relative to its Hadamard bound), rows of
/// order one keep their absolute size, so the guarded value lies in [0, 1].
inline constexpr double kSingularityThreshold = 1e-5;

struct ExponentialAction {
  ComplexMatrix e;    // exp(Ax + A^3 t)
  ComplexMatrix l;    // E B
  ComplexMatrix phi;  // (N d) x d, column j = E c^(j)
};

/// Throws OverflowError beyond kOverflowExponent.
ExponentialAction exponential_action(const OperatorData& od, EvalPoint p);

/// Largest Re(k_m x + k_m^3 t).
double max_exponent(const OperatorData& od, EvalPoint p) noexcept;

/// Determinant route. Throws SingularPointError / OverflowError.
ComplexMatrix evaluate_point_det(const OperatorData& od, EvalPoint p);

/// Rank-one route. Throws SingularPointError / OverflowError.
ComplexMatrix evaluate_point_fast(const OperatorData& od, EvalPoint p);

ComplexMatrix evaluate_point(const OperatorData& od, EvalPoint p, EvalPath path);

enum class PointState : std::uint8_t { regular = 0, singular = 1, overflow = 2 };

struct PointResult {
  PointState state = PointState::regular;
  /// Row-scaled |det(I + iL)| and |det(I - iL)|; for overflow points the
  /// offending exponent is stored in det_plus and det_minus is 0.
  double det_plus = 0.0;
  double det_minus = 0.0;
  ComplexMatrix value;  // empty unless regular
};

/// Non-throwing evaluation used by the grid kernels.
PointResult try_evaluate_point(const OperatorData& od, EvalPoint p, EvalPath path);

/// d x d matrix field sampled on a grid. Storage is t-major:
/// values[((it * nx + ix) * d + i) * d + j]. Masked points hold NaN.
struct MatrixField {
  GridSpec grid;
  std::size_t d = 0;
  std::vector<Complex> values;
  std::vector<PointState> state;
  /// min(det_plus, det_minus) for singular points, the exponent for
  /// overflow points, 0 otherwise.
  std::vector<double> mask_detail;

  MatrixField() = default;
  MatrixField(const GridSpec& g, std::size_t dim);

  std::size_t index(std::size_t ix, std::size_t it) const noexcept { return it * grid.nx + ix; }
  bool masked(std::size_t ix, std::size_t it) const noexcept {
    return state[index(ix, it)] != PointState::regular;
  }
  Complex entry(std::size_t ix, std::size_t it, std::size_t i, std::size_t j) const noexcept {
    return values[(index(ix, it) * d + i) * d + j];
  }
  ComplexMatrix value(std::size_t ix, std::size_t it) const;
  void set(std::size_t ix, std::size_t it, const PointResult& r);
  std::size_t masked_count() const noexcept;
};

/// Bitwise equality of grids, masks and values (NaN payloads compare equal).
bool identical(const MatrixField& a, const MatrixField& b) noexcept;

/// Serial reference kernel.
MatrixField evaluate_grid_serial(const OperatorData& od, const GridSpec& g, EvalPath path);
/// OpenMP kernel; identical output to the serial kernel for any schedule.
MatrixField evaluate_grid_parallel(const OperatorData& od, const GridSpec& g, EvalPath path);
/// Parallel kernel when built with OpenMP, serial otherwise.
MatrixField evaluate_grid(const OperatorData& od, const GridSpec& g, EvalPath path);

}  // namespace matsol
