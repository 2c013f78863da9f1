#include <cmath>
#include <cstring>
#include <limits>

#include "matsol/soliton.hpp"

#ifdef MATSOL_HAVE_OPENMP
#include <omp.h>
#endif

namespace matsol {

MatrixField::MatrixField(const GridSpec& g, std::size_t dim)
    : grid(g),
      d(dim),
      values(g.points() * dim * dim),
      state(g.points(), PointState::regular),
      mask_detail(g.points(), 0.0) {}

ComplexMatrix MatrixField::value(std::size_t ix, std::size_t it) const {
  ComplexMatrix m(d, d);
  const std::size_t base = index(ix, it) * d * d;
  for (std::size_t k = 0; k < d * d; ++k) m.data()[k] = values[base + k];
  return m;
}

void MatrixField::set(std::size_t ix, std::size_t it, const PointResult& r) {
  const std::size_t idx = index(ix, it);
  state[idx] = r.state;
  Complex* dst = values.data() + idx * d * d;
  if (r.state == PointState::regular) {
    std::copy(r.value.data().begin(), r.value.data().end(), dst);
    mask_detail[idx] = 0.0;
  } else {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::fill(dst, dst + d * d, Complex{nan, nan});
    mask_detail[idx] = r.state == PointState::singular ? std::min(r.det_plus, r.det_minus) : r.det_plus;
  }
}

std::size_t MatrixField::masked_count() const noexcept {
  std::size_t n = 0;
  for (auto s : state) n += s != PointState::regular;
  return n;
}

bool identical(const MatrixField& a, const MatrixField& b) noexcept {
  if (!(a.grid == b.grid) || a.d != b.d || a.state != b.state) return false;
  if (a.values.size() != b.values.size()) return false;
  return std::memcmp(a.values.data(), b.values.data(), a.values.size() * sizeof(Complex)) == 0 &&
         std::memcmp(a.mask_detail.data(), b.mask_detail.data(),
                     a.mask_detail.size() * sizeof(double)) == 0;
}

MatrixField evaluate_grid_serial(const OperatorData& od, const GridSpec& g, EvalPath path) {
  MatrixField f(g, od.d);
  for (std::size_t it = 0; it < g.nt; ++it)
    for (std::size_t ix = 0; ix < g.nx; ++ix)
      f.set(ix, it, try_evaluate_point(od, {g.x_at(ix), g.t_at(it)}, path));
  return f;
}

MatrixField evaluate_grid_parallel(const OperatorData& od, const GridSpec& g, EvalPath path) {
  MatrixField f(g, od.d);
  const auto total = static_cast<std::ptrdiff_t>(g.points());
  // Every point writes only its own slots, so the result does not depend on
  // the schedule.
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t k = 0; k < total; ++k) {
    const auto ix = static_cast<std::size_t>(k) % g.nx;
    const auto it = static_cast<std::size_t>(k) / g.nx;
    f.set(ix, it, try_evaluate_point(od, {g.x_at(ix), g.t_at(it)}, path));
  }
  return f;
}

MatrixField evaluate_grid(const OperatorData& od, const GridSpec& g, EvalPath path) {
#ifdef MATSOL_HAVE_OPENMP
  return evaluate_grid_parallel(od, g, path);
#else
  return evaluate_grid_serial(od, g, path);
#endif
}

}  // namespace matsol
