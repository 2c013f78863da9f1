#pragma once

// Finite-difference certification of the mKdV -> KdV -> pKdV chain
//
//   mKdV  V_t = V_xxx + 3 {V^2, V_x}
//   KdV   U_t = U_xxx + 3 {U, U_x},     U = s i V_x + V^2   (Miura, s = +-1)
//   pKdV  W_t = W_xxx + 3 W_x^2,        W = int_{x_cut}^x U dx
//
// Derivatives are central differences over fresh pointwise evaluations, never
// over a stored grid.

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "matsol/complex_matrix.hpp"
#include "matsol/soliton.hpp"

namespace matsol {

struct StencilSpec {
  double h = 1e-2;
  int order = 4;  // 2, 4 or 6
  bool richardson = false;
};

/// Throws Error unless h > 0 and order is 2, 4 or 6.
void check_stencil(const StencilSpec& s);

/// Largest offset (in units of h) touched along x and along t.
int stencil_reach_x(const StencilSpec& s);
int stencil_reach_t(const StencilSpec& s);

/// Pointwise matrix field. Must be thread-safe; masked points throw.
using Sampler = std::function<ComplexMatrix(EvalPoint)>;

/// V of the scenario; singular and overflow points raise StencilError.
Sampler soliton_sampler(const OperatorData& od, EvalPath path = EvalPath::fast);

struct Derivatives {
  ComplexMatrix v, vx, vxx, vxxx, vt;
};

/// Throws StencilError when a node is masked.
Derivatives sample_derivatives(const Sampler& f, EvalPoint p, const StencilSpec& s);
Derivatives sample_derivatives(const OperatorData& od, EvalPoint p, const StencilSpec& s,
                               EvalPath path = EvalPath::fast);

/// V_t - V_xxx - 3 {V^2, V_x}
ComplexMatrix mkdv_residual(const Sampler& v, EvalPoint p, const StencilSpec& s);
ComplexMatrix mkdv_residual(const OperatorData& od, EvalPoint p, const StencilSpec& s,
                            EvalPath path = EvalPath::fast);

/// U = sign i V_x + V^2 with V_x from the stencil.
ComplexMatrix miura_map(const Sampler& v, EvalPoint p, const StencilSpec& s, int sign = 1);
ComplexMatrix miura_map(const OperatorData& od, EvalPoint p, const StencilSpec& s, int sign = 1,
                        EvalPath path = EvalPath::fast);
Sampler miura_sampler(Sampler v, StencilSpec s, int sign = 1);

/// U_t - U_xxx - 3 {U, U_x}
ComplexMatrix kdv_residual(const Sampler& u, EvalPoint p, const StencilSpec& s);

struct QuadratureSpec {
  double step = 1e-2;  // composite Simpson step (rounded down to an even count)
  double decay_tol = 1e-10;
};

/// W(x, t) = int_{x_cut}^x U(s, t) ds. Throws WindowError when
/// |U(x_cut, t)| >= q.decay_tol.
ComplexMatrix potential_map(const Sampler& u, double t, double x_cut, double x, const QuadratureSpec& q);

/// Walks left from x_start in steps of 5 until |U| < q.decay_tol at every t
/// in ts. Throws WindowError if nothing is found above x_start - 400.
double find_decay_cut(const Sampler& u, const std::vector<double>& ts, double x_start,
                      const QuadratureSpec& q);

/// W sampler with a fixed lower limit.
Sampler potential_sampler(Sampler u, double x_cut, QuadratureSpec q);

/// W_t - W_xxx - 3 W_x^2 with all derivatives from w.
ComplexMatrix pkdv_residual(const Sampler& w, EvalPoint p, const StencilSpec& s);
/// Same with W_x = U and W_xxx = U_xx taken from u; only W_t differences w.
ComplexMatrix pkdv_residual(const Sampler& w, const Sampler& u, EvalPoint p, const StencilSpec& s);

/// A residual operator together with what the roundoff floor needs.
struct ResidualOperator {
  std::string tag;  // mkdv | kdv | pkdv
  std::function<ComplexMatrix(EvalPoint, const StencilSpec&)> eval;
  /// Roundoff amplification per unit noise scale at a given stencil.
  std::function<double(const StencilSpec&)> noise_gain;
  /// Evaluation noise of the differenced field at a point, in units of eps:
  /// |V| for a bare sampler, raised to |V_fast - V_det| / eps for scenarios.
  std::function<double(EvalPoint)> noise_scale;
};

ResidualOperator mkdv_operator(const OperatorData& od, EvalPath path = EvalPath::fast);
ResidualOperator mkdv_operator(Sampler v);
ResidualOperator kdv_operator(const OperatorData& od, int sign, EvalPath path = EvalPath::fast);
/// x_cut is found per evaluation point with find_decay_cut.
ResidualOperator pkdv_operator(const OperatorData& od, int sign, QuadratureSpec q,
                               EvalPath path = EvalPath::fast);

struct ConvergenceStep {
  double h = 0.0;
  double sup = 0.0;
  double rms = 0.0;
  double floor = 0.0;  // estimated roundoff level of sup
};

struct ResidualReport {
  std::string equation;
  int order = 4;
  double h = 0.0;
  std::size_t samples = 0;
  std::size_t skipped = 0;  // points whose stencil crossed the mask
  double sup = 0.0;
  double rms = 0.0;
  EvalPoint worst{};
  /// Set by convergence_study only.
  std::vector<ConvergenceStep> steps;
  std::optional<double> slope;          // least-squares log(sup) vs log(h), above the floor
  std::vector<double> halving_ratios;   // sup(h) / sup(h / 2) for consecutive steps
  bool roundoff_limited = false;
};

/// Residual at each point (points evaluated in parallel, reduced in order).
/// Points raising StencilError are skipped; throws Error if all are.
ResidualReport residual_report(const ResidualOperator& op, const std::vector<EvalPoint>& points,
                               const StencilSpec& s);

/// Runs residual_report for every h in h_list (at least two). A step counts
/// towards the slope when its sup exceeds 10x its roundoff floor.
ResidualReport convergence_study(const ResidualOperator& op, const std::vector<EvalPoint>& points,
                                 const std::vector<double>& h_list, const StencilSpec& base);

/// Roundoff floor of sup at one stencil: eps * gain * max noise scale.
double roundoff_floor(const ResidualOperator& op, const std::vector<EvalPoint>& points,
                      const StencilSpec& s);

struct MiuraProbe {
  double sup_plus = 0.0;
  double sup_minus = 0.0;
  bool plus_valid = false;
  bool minus_valid = false;
  /// +1 when valid (printed sign preferred on ties), else the smaller residual.
  int selected = 1;
};

MiuraProbe probe_miura_sign(const OperatorData& od, const std::vector<EvalPoint>& points,
                            const StencilSpec& s, double threshold = 1e-4,
                            EvalPath path = EvalPath::fast);

/// Uniform random points in the grid window accepted by `accept`; draws at
/// most 1000 * count candidates, then throws Error.
std::vector<EvalPoint> sample_points(const GridSpec& g, std::size_t count, std::uint64_t seed,
                                     const std::function<bool(EvalPoint)>& accept);

/// Accepts points where op evaluates at stencil s without touching the mask.
std::function<bool(EvalPoint)> stencil_clear(const ResidualOperator& op, const StencilSpec& s);

}  // namespace matsol
