#include "matsol/spectral.hpp"

#include <cmath>
#include <sstream>

namespace matsol {

namespace {

constexpr double kFactorizationTolerance = 1e-12;

std::string describe(Complex z) {
  std::ostringstream os;
  os << "(" << z.real() << ", " << z.imag() << ")";
  return os.str();
}

std::string summarize(const std::vector<ValidationIssue>& issues) {
  std::ostringstream os;
  os << "invalid scenario:";
  for (const auto& i : issues) {
    if (i.severity != Severity::error) continue;
    os << " [" << to_string(i.code) << "] " << i.message << ";";
  }
  return os.str();
}

bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

}  // namespace

double GridSpec::x_at(std::size_t i) const noexcept {
  if (nx <= 1) return x_min;
  if (i + 1 == nx) return x_max;
  return x_min + double(i) * dx();
}

double GridSpec::t_at(std::size_t j) const noexcept {
  if (nt <= 1) return t_min;
  if (j + 1 == nt) return t_max;
  return t_min + double(j) * dt();
}

const char* to_string(IssueCode code) noexcept {
  switch (code) {
    case IssueCode::empty_scenario: return "empty_scenario";
    case IssueCode::nonpositive_real_part: return "nonpositive_real_part";
    case IssueCode::size_mismatch: return "size_mismatch";
    case IssueCode::opposite_eigenvalues: return "opposite_eigenvalues";
    case IssueCode::non_finite_value: return "non_finite_value";
    case IssueCode::bad_grid: return "bad_grid";
    case IssueCode::degenerate_spectral_matrices: return "degenerate_spectral_matrices";
  }
  return "unknown";
}

ValidationError::ValidationError(std::vector<ValidationIssue> issues)
    : Error(summarize(issues)), issues_(std::move(issues)) {}

std::vector<ValidationIssue> check_scenario(const Scenario& s) {
  std::vector<ValidationIssue> out;
  auto error = [&](IssueCode c, std::string msg, std::optional<std::size_t> e = std::nullopt) {
    out.push_back({c, Severity::error, std::move(msg), e});
  };

  if (s.d == 0) error(IssueCode::size_mismatch, "matrix dimension d must be positive");
  if (s.entries.empty()) error(IssueCode::empty_scenario, "at least one soliton is required");

  bool shapes_ok = s.d > 0;
  for (std::size_t j = 0; j < s.entries.size(); ++j) {
    const auto& e = s.entries[j];
    if (!finite(e.k)) {
      error(IssueCode::non_finite_value, "soliton " + std::to_string(j) + ": eigenvalue is not finite", j);
    } else if (!(e.k.real() > 0.0)) {
      error(IssueCode::nonpositive_real_part,
            "soliton " + std::to_string(j) + ": eigenvalue real part must be positive, got k = " +
                describe(e.k),
            j);
    }
    if (e.weight.rows() != s.d || e.weight.cols() != s.d) {
      shapes_ok = false;
      std::ostringstream os;
      os << "soliton " << j << ": spectral matrix is " << e.weight.rows() << "x"
         << e.weight.cols() << ", expected " << s.d << "x" << s.d;
      error(IssueCode::size_mismatch, os.str(), j);
    } else if (!all_finite(e.weight)) {
      error(IssueCode::non_finite_value, "soliton " + std::to_string(j) + ": spectral matrix has non-finite entries", j);
    }
  }

  for (std::size_t m = 0; m < s.entries.size(); ++m) {
    for (std::size_t n = m; n < s.entries.size(); ++n) {
      const Complex sum = s.entries[m].k + s.entries[n].k;
      if (finite(sum) && std::abs(sum) == 0.0) {
        error(IssueCode::opposite_eigenvalues,
              "k_" + std::to_string(m) + " + k_" + std::to_string(n) + " vanishes", n);
      }
    }
  }

  const auto& g = s.grid;
  if (g.nx < 1 || g.nt < 1 || !std::isfinite(g.x_min) || !std::isfinite(g.x_max) ||
      !std::isfinite(g.t_min) || !std::isfinite(g.t_max) || g.x_max < g.x_min ||
      g.t_max < g.t_min || (g.nx > 1 && g.x_max == g.x_min) || (g.nt > 1 && g.t_max == g.t_min)) {
    error(IssueCode::bad_grid, "grid must have finite increasing bounds and at least one node per axis");
  }

  if (shapes_ok && !s.entries.empty()) {
    // Covectors d^(j) are the rows of (iB_1 | ... | iB_N).
    ComplexMatrix stacked(s.d, s.d * s.entries.size());
    for (std::size_t n = 0; n < s.entries.size(); ++n)
      for (std::size_t i = 0; i < s.d; ++i)
        for (std::size_t j = 0; j < s.d; ++j) stacked(i, n * s.d + j) = s.entries[n].weight(i, j);
    if (all_finite(stacked)) {
      const std::size_t r = numerical_rank(stacked);
      if (r < s.d) {
        out.push_back({IssueCode::degenerate_spectral_matrices, Severity::warning,
                       "degenerate spectral matrices: covectors d^(j) span rank " +
                           std::to_string(r) + " < d = " + std::to_string(s.d),
                       std::nullopt});
      }
    }
  }
  return out;
}

const Scenario& validate_scenario(const Scenario& s) {
  auto issues = check_scenario(s);
  for (const auto& i : issues) {
    if (i.severity == Severity::error) throw ValidationError(std::move(issues));
  }
  return s;
}

namespace {

// a = p qt with p of full column rank, by elimination with complete pivoting;
// pivots below 1e-12 max|a| end the elimination. Empty factors for a = 0.
void rank_factor(const ComplexMatrix& a, ComplexMatrix& p, ComplexMatrix& qt) {
  ComplexMatrix rest = a;
  const double tol = 1e-12 * sup_norm(a);
  std::vector<ComplexMatrix> cols, rows;
  while (cols.size() < std::min(a.rows(), a.cols())) {
    std::size_t pi = 0, pj = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < rest.rows(); ++i)
      for (std::size_t j = 0; j < rest.cols(); ++j)
        if (std::abs(rest(i, j)) > best) {
          best = std::abs(rest(i, j));
          pi = i;
          pj = j;
        }
    if (!(best > tol)) break;
    ComplexMatrix col(rest.rows(), 1), row(1, rest.cols());
    const Complex pivot = rest(pi, pj);
    for (std::size_t i = 0; i < rest.rows(); ++i) col(i, 0) = rest(i, pj) / pivot;
    for (std::size_t j = 0; j < rest.cols(); ++j) row(0, j) = rest(pi, j);
    rest = rest - mat_mul(col, row);
    cols.push_back(std::move(col));
    rows.push_back(std::move(row));
  }
  p = ComplexMatrix(a.rows(), cols.size());
  qt = ComplexMatrix(rows.size(), a.cols());
  for (std::size_t k = 0; k < cols.size(); ++k) {
    for (std::size_t i = 0; i < a.rows(); ++i) p(i, k) = cols[k](i, 0);
    for (std::size_t j = 0; j < a.cols(); ++j) qt(k, j) = rows[k](0, j);
  }
}

}  // namespace

ComplexMatrix effective_weight(const Scenario& s, std::size_t j) {
  ComplexMatrix w = s.entries.at(j).weight;
  if (s.options.imaginary_weights) w *= Complex{0.0, 1.0};
  return w;
}

ComplexMatrix DyadFactorization::sum() const {
  const std::size_t n = dimension();
  ComplexMatrix s(n, n);
  for (std::size_t j = 0; j < c.size(); ++j) s += mat_mul(c[j], d[j]);
  return s;
}

ComplexMatrix DyadFactorization::c_matrix() const {
  ComplexMatrix m(dimension(), c.size());
  for (std::size_t j = 0; j < c.size(); ++j)
    for (std::size_t r = 0; r < m.rows(); ++r) m(r, j) = c[j](r, 0);
  return m;
}

ComplexMatrix DyadFactorization::d_matrix() const {
  ComplexMatrix m(d.size(), dimension());
  for (std::size_t i = 0; i < d.size(); ++i)
    for (std::size_t r = 0; r < m.cols(); ++r) m(i, r) = d[i](0, r);
  return m;
}

OperatorData build_operator_data(const Scenario& s) {
  validate_scenario(s);
  OperatorData od;
  od.d = s.d;
  od.n = s.n();
  const std::size_t dim = od.order();
  od.a = ComplexMatrix(dim, dim);
  od.b = ComplexMatrix(dim, dim);
  const Complex i_unit{0.0, 1.0};

  for (std::size_t n = 0; n < od.n; ++n) {
    od.k.push_back(s.entries[n].k);
    od.weights.push_back(effective_weight(s, n));
  }
  const auto& weights = od.weights;
  for (std::size_t m = 0; m < od.n; ++m) {
    for (std::size_t r = 0; r < od.d; ++r) od.a(m * od.d + r, m * od.d + r) = od.k[m];
    for (std::size_t n = 0; n < od.n; ++n) {
      const Complex f = i_unit / (od.k[m] + od.k[n]);
      for (std::size_t r = 0; r < od.d; ++r)
        for (std::size_t c = 0; c < od.d; ++c) od.b(m * od.d + r, n * od.d + c) = f * weights[n](r, c);
    }
  }
  od.fact = canonical_factorization(od, false);
  od.reduced = reduce(od);
  return od;
}

DyadFactorization canonical_factorization(OperatorData& od, bool strict) {
  const std::size_t d = od.d;
  const std::size_t dim = od.order();
  const Complex i_unit{0.0, 1.0};

  DyadFactorization f;
  for (std::size_t j = 0; j < d; ++j) {
    ComplexMatrix c(dim, 1);
    for (std::size_t m = 0; m < od.n; ++m) c(m * d + j, 0) = 1.0;
    f.c.push_back(std::move(c));
  }
  // Block (m, n) of AB + BA equals (k_m + k_n) B_(m,n) = i B_n for every m.
  for (std::size_t j = 0; j < d; ++j) {
    ComplexMatrix row(1, dim);
    for (std::size_t n = 0; n < od.n; ++n)
      for (std::size_t c = 0; c < d; ++c) row(0, n * d + c) = i_unit * od.weights[n](j, c);
    f.d.push_back(std::move(row));
  }
  const ComplexMatrix ab = mat_mul(od.a, od.b) + mat_mul(od.b, od.a);

  const double scale = sup_norm(ab);
  const double residual = sup_norm(ab - f.sum());
  if (residual > kFactorizationTolerance * std::max(scale, 1e-300)) {
    std::ostringstream os;
    os << "canonical factorization residual " << residual << " exceeds " << kFactorizationTolerance
       << " * " << scale;
    throw FactorizationError(os.str());
  }

  od.covector_rank = numerical_rank(f.d_matrix());
  if (od.covector_rank < d) {
    const std::string msg = "degenerate spectral matrices: covectors d^(j) have rank " +
                            std::to_string(od.covector_rank) + " < d = " + std::to_string(d);
    if (strict) throw DegenerateSpectralError(msg, od.covector_rank);
    od.warnings.push_back(msg);
  }
  return f;
}

DyadFactorization regauge_factorization(const DyadFactorization& f, const ComplexMatrix& t) {
  const std::size_t d = f.count();
  if (t.rows() != d || t.cols() != d) {
    throw DimensionError("regauge_factorization: gauge matrix must be " + std::to_string(d) + "x" +
                         std::to_string(d));
  }
  const ComplexMatrix t_inv = LUDecomposition(t).solve(ComplexMatrix::identity(d));
  const ComplexMatrix c_new = mat_mul(f.c_matrix(), t);
  const ComplexMatrix d_new = mat_mul(t_inv, f.d_matrix());

  DyadFactorization g;
  const std::size_t dim = f.dimension();
  for (std::size_t j = 0; j < d; ++j) {
    ComplexMatrix c(dim, 1), row(1, dim);
    for (std::size_t r = 0; r < dim; ++r) {
      c(r, 0) = c_new(r, j);
      row(0, r) = d_new(j, r);
    }
    g.c.push_back(std::move(c));
    g.d.push_back(std::move(row));
  }
  return g;
}

ReducedForm reduce(const OperatorData& od) {
  const std::size_t d = od.d;
  ReducedForm r;
  std::vector<ComplexMatrix> p(od.n), qt(od.n);
  bool full = true;
  for (std::size_t n = 0; n < od.n; ++n) {
    rank_factor(od.weights[n], p[n], qt[n]);
    full = full && p[n].cols() == d;
  }
  if (full) {
    r.rank = od.order();
    for (std::size_t n = 0; n < od.n; ++n)
      for (std::size_t c = 0; c < d; ++c) r.block.push_back(n);
    r.kernel = od.b;
    r.left = od.fact.d_matrix();
    r.right = od.fact.c_matrix();
    return r;
  }

  std::vector<std::size_t> offset(od.n + 1, 0);
  for (std::size_t n = 0; n < od.n; ++n) {
    offset[n + 1] = offset[n] + p[n].cols();
    for (std::size_t a = 0; a < p[n].cols(); ++a) r.block.push_back(n);
  }
  r.rank = offset[od.n];
  const Complex i_unit{0.0, 1.0};
  r.kernel = ComplexMatrix(r.rank, r.rank);
  ComplexMatrix wt(r.rank, od.order());
  for (std::size_t n = 0; n < od.n; ++n) {
    for (std::size_t m = 0; m < od.n; ++m) {
      const ComplexMatrix qp = mat_mul(qt[n], p[m]);
      const Complex f = i_unit / (od.k[n] + od.k[m]);
      for (std::size_t a = 0; a < qp.rows(); ++a)
        for (std::size_t b = 0; b < qp.cols(); ++b) r.kernel(offset[n] + a, offset[m] + b) = f * qp(a, b);
    }
    for (std::size_t a = 0; a < qt[n].rows(); ++a)
      for (std::size_t c = 0; c < d; ++c) wt(offset[n] + a, n * d + c) = qt[n](a, c);
  }
  r.right = mat_mul(wt, od.fact.c_matrix());
  // left solves left (W^T W) = D W; W^T W is block diagonal and invertible.
  const ComplexMatrix w = transpose(wt);
  const ComplexMatrix gram = mat_mul(wt, w);
  r.left = transpose(LUDecomposition(transpose(gram)).solve(transpose(mat_mul(od.fact.d_matrix(), w))));
  return r;
}

OperatorData with_factorization(const OperatorData& od, DyadFactorization f) {
  OperatorData out = od;
  out.fact = std::move(f);
  out.reduced = reduce(out);
  return out;
}

}  // namespace matsol
