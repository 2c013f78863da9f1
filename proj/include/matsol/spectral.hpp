#pragma once

// Spectral data for reflectionless N-soliton solutions and the operator pair
// (A, B) built from it.
//
// For eigenvalues k_1..k_N and d x d weights B_1..B_N the construction is
//   A = blockdiag(k_1 I_d, ..., k_N I_d),   B_(m,n) = i/(k_m + k_n) * B_n,
// acting on C^(N d). Because A is block-scalar, AB + BA has blocks i B_n, which
// gives the rank <= d factorization AB + BA = sum_j d^(j) (x) c^(j) directly.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "matsol/complex_matrix.hpp"
#include "matsol/errors.hpp"

namespace matsol {

struct GridSpec {
  double x_min = 0.0;
  double x_max = 0.0;
  std::size_t nx = 1;
  double t_min = 0.0;
  double t_max = 0.0;
  std::size_t nt = 1;

  /// Grid coordinates; the last node is exactly x_max / t_max.
  double x_at(std::size_t i) const noexcept;
  double t_at(std::size_t j) const noexcept;
  double dx() const noexcept { return nx > 1 ? (x_max - x_min) / double(nx - 1) : 0.0; }
  double dt() const noexcept { return nt > 1 ? (t_max - t_min) / double(nt - 1) : 0.0; }
  std::size_t points() const noexcept { return nx * nt; }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

enum class EvalPath { det, fast };

struct SolitonEntry {
  Complex k;
  ComplexMatrix weight;  // B_j, d x d
};

struct ScenarioOptions {
  /// Multiply every B_j by +i before assembly (real-valued solutions for
  /// real caption data, see README).
  bool imaginary_weights = false;
  EvalPath path = EvalPath::fast;
};

struct Scenario {
  std::size_t d = 1;
  std::vector<SolitonEntry> entries;
  GridSpec grid;
  std::string label;
  ScenarioOptions options;

  std::size_t n() const noexcept { return entries.size(); }
};

enum class IssueCode {
  empty_scenario,
  nonpositive_real_part,
  size_mismatch,
  opposite_eigenvalues,
  non_finite_value,
  bad_grid,
  degenerate_spectral_matrices,
};

enum class Severity { warning, error };

struct ValidationIssue {
  IssueCode code;
  Severity severity;
  std::string message;
  /// Index of the offending soliton entry, when the issue concerns one.
  std::optional<std::size_t> entry;
};

const char* to_string(IssueCode code) noexcept;

/// All violations and warnings, in a stable order.
std::vector<ValidationIssue> check_scenario(const Scenario& s);

class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<ValidationIssue> issues);
  const std::vector<ValidationIssue>& issues() const noexcept { return issues_; }

 private:
  std::vector<ValidationIssue> issues_;
};

/// Returns s unchanged when no error-severity issue exists; otherwise throws
/// ValidationError listing every violation. Degenerate spectral matrices are
/// a warning, not an error.
const Scenario& validate_scenario(const Scenario& s);

/// Weight matrix as it enters the construction (applies imaginary_weights).
ComplexMatrix effective_weight(const Scenario& s, std::size_t j);

struct DyadFactorization {
  std::vector<ComplexMatrix> c;  // d columns, each (N d) x 1
  std::vector<ComplexMatrix> d;  // d rows, each 1 x (N d)

  std::size_t count() const noexcept { return c.size(); }
  std::size_t dimension() const noexcept { return c.empty() ? 0 : c.front().rows(); }
  /// sum_j d^(j) (x) c^(j) as an operator matrix: sum_j c^(j) d^(j).
  ComplexMatrix sum() const;
  /// (N d) x d matrix whose columns are the c^(j).
  ComplexMatrix c_matrix() const;
  /// d x (N d) matrix whose rows are the d^(j).
  ComplexMatrix d_matrix() const;
};

/// Coordinates of dimension rho = sum_n rank(B_n) in which V is evaluated.
/// With B_n = P_n Q_n^T and W^T = blockdiag(Q_n^T), Sylvester's identity gives
/// det(I + s i L) = det(I_rho + s i diag(e) K) with blocks
/// K_(n,m) = i/(k_n + k_m) Q_n^T P_m; further D = left W^T and
/// W^T E C = diag(e) right, e holding exp(k_n x + k_n^3 t) per reduced row.
/// Full-rank weights use P_n = B_n, Q_n = I, so K = B, left = D, right = C.
struct ReducedForm {
  std::size_t rank = 0;
  std::vector<std::size_t> block;  // soliton index of each reduced row
  ComplexMatrix kernel;            // rho x rho
  ComplexMatrix left;              // d x rho
  ComplexMatrix right;             // rho x d
};

struct OperatorData {
  ComplexMatrix a;
  ComplexMatrix b;
  DyadFactorization fact;
  std::size_t d = 0;
  std::size_t n = 0;
  std::vector<Complex> k;
  std::vector<ComplexMatrix> weights;  // effective B_n
  /// Rank of the stacked covectors; < d means dependent d^(j).
  std::size_t covector_rank = 0;
  std::vector<std::string> warnings;
  ReducedForm reduced;

  std::size_t order() const noexcept { return n * d; }
};

/// Assembles A, B and the canonical factorization. Throws ValidationError
/// for invalid scenarios.
OperatorData build_operator_data(const Scenario& s);

/// c^(j) = e_j stacked N times, d^(j) = row j of (iB_1 | ... | iB_N).
/// Checks the residual of AB + BA - sum d (x) c (FactorizationError when
/// above 1e-12 relative). Dependent covectors raise DegenerateSpectralError
/// when strict, otherwise only a warning is recorded in od.warnings.
DyadFactorization canonical_factorization(OperatorData& od, bool strict = false);

/// Change of basis c' = c T, d' = T^-1 d; the dyadic sum is unchanged.
/// Throws SingularMatrixError for singular T.
DyadFactorization regauge_factorization(const DyadFactorization& f, const ComplexMatrix& t);

/// Rank factorization of every weight and the reduced coordinates of od.fact.
ReducedForm reduce(const OperatorData& od);

/// Copy of od evaluated with a different factorization.
OperatorData with_factorization(const OperatorData& od, DyadFactorization f);

}  // namespace matsol
