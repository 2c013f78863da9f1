#include "matsol/pde_verify.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <memory>
#include <random>
#include <sstream>

#include "matsol/errors.hpp"

namespace matsol {

namespace {

const Complex kI{0.0, 1.0};

// Central-difference weights. First and third derivatives act on
// f(jh) - f(-jh), j = 1.., the second on c0 f(0) + sum b_j (f(jh) + f(-jh)).
struct Weights {
  std::vector<double> first;
  double second_center;
  std::vector<double> second;
  std::vector<double> third;
};

const Weights& weights(int order) {
  static const Weights o2{{1.0 / 2}, -2.0, {1.0}, {-1.0, 1.0 / 2}};
  static const Weights o4{{2.0 / 3, -1.0 / 12}, -5.0 / 2, {4.0 / 3, -1.0 / 12}, {-13.0 / 8, 1.0, -1.0 / 8}};
  static const Weights o6{{3.0 / 4, -3.0 / 20, 1.0 / 60},
                          -49.0 / 18,
                          {3.0 / 2, -3.0 / 20, 1.0 / 90},
                          {-61.0 / 30, 169.0 / 120, -3.0 / 10, 7.0 / 240}};
  switch (order) {
    case 2: return o2;
    case 4: return o4;
    default: return o6;
  }
}

double abs_sum(const std::vector<double>& w) {
  double s = 0.0;
  for (double v : w) s += std::abs(v);
  return s;
}

// Roundoff gains of the first, second and third difference quotients.
double gain1(const StencilSpec& s) { return 2.0 * abs_sum(weights(s.order).first) / s.h; }
double gain2(const StencilSpec& s) {
  const auto& w = weights(s.order);
  return (std::abs(w.second_center) + 2.0 * abs_sum(w.second)) / (s.h * s.h);
}
double gain3(const StencilSpec& s) { return 2.0 * abs_sum(weights(s.order).third) / (s.h * s.h * s.h); }

// Gain of a Richardson combination (2^p D(h/2) - D(h)) / (2^p - 1).
double combined_gain(const StencilSpec& s, const std::function<double(const StencilSpec&)>& g) {
  if (!s.richardson) return g(s);
  StencilSpec half = s;
  half.h = s.h / 2;
  half.richardson = false;
  StencilSpec full = half;
  full.h = s.h;
  const double p2 = std::pow(2.0, s.order);
  return (p2 * g(half) + g(full)) / (p2 - 1.0);
}

ComplexMatrix sample(const Sampler& f, EvalPoint p) {
  try {
    return f(p);
  } catch (const SingularPointError& e) {
    throw StencilError(std::string("stencil crosses singularity: ") + e.what());
  } catch (const OverflowError& e) {
    throw StencilError(std::string("stencil crosses singularity: ") + e.what());
  }
}

Derivatives plain_derivatives(const Sampler& f, EvalPoint p, const StencilSpec& s) {
  const Weights& w = weights(s.order);
  const int rx = stencil_reach_x(s), rt = stencil_reach_t(s);
  const double h = s.h;

  Derivatives out;
  out.v = sample(f, p);
  const std::size_t r = out.v.rows(), c = out.v.cols();
  std::vector<ComplexMatrix> dx_odd, dx_even;  // f(x+jh) - f(x-jh), f(x+jh) + f(x-jh)
  for (int j = 1; j <= rx; ++j) {
    const ComplexMatrix fp = sample(f, {p.x + j * h, p.t});
    const ComplexMatrix fm = sample(f, {p.x - j * h, p.t});
    dx_odd.push_back(fp - fm);
    dx_even.push_back(fp + fm);
  }
  out.vx = ComplexMatrix(r, c);
  out.vxx = w.second_center * out.v;
  out.vxxx = ComplexMatrix(r, c);
  for (std::size_t j = 0; j < w.first.size(); ++j) out.vx += w.first[j] * dx_odd[j];
  for (std::size_t j = 0; j < w.second.size(); ++j) out.vxx += w.second[j] * dx_even[j];
  for (std::size_t j = 0; j < w.third.size(); ++j) out.vxxx += w.third[j] * dx_odd[j];
  out.vx *= 1.0 / h;
  out.vxx *= 1.0 / (h * h);
  out.vxxx *= 1.0 / (h * h * h);

  out.vt = ComplexMatrix(r, c);
  for (int j = 1; j <= rt; ++j) {
    const ComplexMatrix diff = sample(f, {p.x, p.t + j * h}) - sample(f, {p.x, p.t - j * h});
    out.vt += w.first[j - 1] * diff;
  }
  out.vt *= 1.0 / h;
  return out;
}

ComplexMatrix extrapolate(const ComplexMatrix& coarse, const ComplexMatrix& fine, double p2) {
  ComplexMatrix out = p2 * fine;
  out -= coarse;
  out *= 1.0 / (p2 - 1.0);
  return out;
}

std::vector<double> stencil_times(EvalPoint p, const StencilSpec& s) {
  std::vector<double> ts{p.t};
  const int rt = stencil_reach_t(s);
  for (int j = 1; j <= rt; ++j) {
    ts.push_back(p.t + j * s.h);
    ts.push_back(p.t - j * s.h);
  }
  return ts;
}

constexpr double kQuadratureSpan = 50.0;

// The two routes round differently; their gap exposes ill-conditioned solves
// that eps * |V| would miss.
std::function<double(EvalPoint)> route_noise(const OperatorData& od) {
  return [od](EvalPoint p) {
    const PointResult a = try_evaluate_point(od, p, EvalPath::fast);
    const PointResult b = try_evaluate_point(od, p, EvalPath::det);
    if (a.state != PointState::regular || b.state != PointState::regular) return 0.0;
    return std::max(sup_norm(a.value), sup_norm(a.value - b.value) / std::numeric_limits<double>::epsilon());
  };
}

}  // namespace

void check_stencil(const StencilSpec& s) {
  if (!(s.h > 0.0) || !std::isfinite(s.h)) throw Error("stencil step h must be positive and finite");
  if (s.order != 2 && s.order != 4 && s.order != 6) {
    throw Error("stencil order must be 2, 4 or 6, got " + std::to_string(s.order));
  }
}

int stencil_reach_x(const StencilSpec& s) { return static_cast<int>(weights(s.order).third.size()); }
int stencil_reach_t(const StencilSpec& s) { return static_cast<int>(weights(s.order).first.size()); }

Sampler soliton_sampler(const OperatorData& od, EvalPath path) {
  auto shared = std::make_shared<const OperatorData>(od);
  return [shared, path](EvalPoint p) { return evaluate_point(*shared, p, path); };
}

Derivatives sample_derivatives(const Sampler& f, EvalPoint p, const StencilSpec& s) {
  check_stencil(s);
  if (!s.richardson) return plain_derivatives(f, p, s);
  StencilSpec coarse = s, fine = s;
  coarse.richardson = fine.richardson = false;
  fine.h = s.h / 2;
  const Derivatives a = plain_derivatives(f, p, coarse);
  const Derivatives b = plain_derivatives(f, p, fine);
  const double p2 = std::pow(2.0, s.order);
  return {a.v, extrapolate(a.vx, b.vx, p2), extrapolate(a.vxx, b.vxx, p2),
          extrapolate(a.vxxx, b.vxxx, p2), extrapolate(a.vt, b.vt, p2)};
}

Derivatives sample_derivatives(const OperatorData& od, EvalPoint p, const StencilSpec& s, EvalPath path) {
  return sample_derivatives(soliton_sampler(od, path), p, s);
}

ComplexMatrix mkdv_residual(const Sampler& v, EvalPoint p, const StencilSpec& s) {
  const Derivatives d = sample_derivatives(v, p, s);
  ComplexMatrix r = d.vt - d.vxxx;
  r -= 3.0 * anticommutator(mat_mul(d.v, d.v), d.vx);
  return r;
}

ComplexMatrix mkdv_residual(const OperatorData& od, EvalPoint p, const StencilSpec& s, EvalPath path) {
  return mkdv_residual(soliton_sampler(od, path), p, s);
}

ComplexMatrix miura_map(const Sampler& v, EvalPoint p, const StencilSpec& s, int sign) {
  check_stencil(s);
  const Weights& w = weights(s.order);
  const int r = stencil_reach_t(s);
  const ComplexMatrix v0 = sample(v, p);
  ComplexMatrix vx(v0.rows(), v0.cols());
  for (int j = 1; j <= r; ++j) vx += w.first[j - 1] * (sample(v, {p.x + j * s.h, p.t}) - sample(v, {p.x - j * s.h, p.t}));
  if (s.richardson) {
    ComplexMatrix fine(v0.rows(), v0.cols());
    const double hf = s.h / 2;
    for (int j = 1; j <= r; ++j) fine += w.first[j - 1] * (sample(v, {p.x + j * hf, p.t}) - sample(v, {p.x - j * hf, p.t}));
    vx = extrapolate((1.0 / s.h) * vx, (1.0 / hf) * fine, std::pow(2.0, s.order));
  } else {
    vx *= 1.0 / s.h;
  }
  ComplexMatrix u = mat_mul(v0, v0);
  u += (double(sign) * kI) * vx;
  return u;
}

ComplexMatrix miura_map(const OperatorData& od, EvalPoint p, const StencilSpec& s, int sign, EvalPath path) {
  return miura_map(soliton_sampler(od, path), p, s, sign);
}

Sampler miura_sampler(Sampler v, StencilSpec s, int sign) {
  return [v = std::move(v), s, sign](EvalPoint p) { return miura_map(v, p, s, sign); };
}

ComplexMatrix kdv_residual(const Sampler& u, EvalPoint p, const StencilSpec& s) {
  const Derivatives d = sample_derivatives(u, p, s);
  ComplexMatrix r = d.vt - d.vxxx;
  r -= 3.0 * anticommutator(d.v, d.vx);
  return r;
}

ComplexMatrix potential_map(const Sampler& u, double t, double x_cut, double x, const QuadratureSpec& q) {
  if (!(q.step > 0.0)) throw Error("quadrature step must be positive");
  const ComplexMatrix u0 = sample(u, {x_cut, t});
  const double tail = sup_norm(u0);
  if (!(tail < q.decay_tol)) {
    std::ostringstream os;
    os << "x_cut = " << x_cut << " is not in the decay region at t = " << t << ": |U| = " << tail;
    throw WindowError(os.str());
  }
  if (x == x_cut) return ComplexMatrix(u0.rows(), u0.cols());

  const double len = x - x_cut;
  auto n = static_cast<std::size_t>(std::ceil(std::abs(len) / q.step));
  n = std::max<std::size_t>(2, n + (n % 2));
  const double step = len / double(n);
  ComplexMatrix acc = u0;
  for (std::size_t i = 1; i < n; ++i) acc += ((i % 2) ? 4.0 : 2.0) * sample(u, {x_cut + double(i) * step, t});
  acc += sample(u, {x, t});
  acc *= step / 3.0;
  return acc;
}

double find_decay_cut(const Sampler& u, const std::vector<double>& ts, double x_start, const QuadratureSpec& q) {
  for (int i = 0; i <= 80; ++i) {
    const double x = x_start - 5.0 * i;
    bool ok = true;
    for (double t : ts) {
      try {
        if (!(sup_norm(u({x, t})) < q.decay_tol)) ok = false;
      } catch (const Error&) {
        ok = false;
      }
      if (!ok) break;
    }
    if (ok) return x;
  }
  std::ostringstream os;
  os << "no decay region found left of x = " << x_start;
  throw WindowError(os.str());
}

Sampler potential_sampler(Sampler u, double x_cut, QuadratureSpec q) {
  return [u = std::move(u), x_cut, q](EvalPoint p) { return potential_map(u, p.t, x_cut, p.x, q); };
}

ComplexMatrix pkdv_residual(const Sampler& w, EvalPoint p, const StencilSpec& s) {
  const Derivatives d = sample_derivatives(w, p, s);
  ComplexMatrix r = d.vt - d.vxxx;
  r -= 3.0 * mat_mul(d.vx, d.vx);
  return r;
}

ComplexMatrix pkdv_residual(const Sampler& w, const Sampler& u, EvalPoint p, const StencilSpec& s) {
  const Derivatives du = sample_derivatives(u, p, s);
  const Weights& wt = weights(s.order);
  auto time_derivative = [&](double h) {
    ComplexMatrix wtd(du.v.rows(), du.v.cols());
    for (int j = 1; j <= stencil_reach_t(s); ++j)
      wtd += wt.first[j - 1] * (sample(w, {p.x, p.t + j * h}) - sample(w, {p.x, p.t - j * h}));
    wtd *= 1.0 / h;
    return wtd;
  };
  ComplexMatrix w_t = time_derivative(s.h);
  if (s.richardson) w_t = extrapolate(w_t, time_derivative(s.h / 2), std::pow(2.0, s.order));
  ComplexMatrix r = w_t - du.vxx;
  r -= 3.0 * mat_mul(du.v, du.v);
  return r;
}

ResidualOperator mkdv_operator(Sampler v) {
  ResidualOperator op;
  op.tag = "mkdv";
  op.eval = [v](EvalPoint p, const StencilSpec& s) { return mkdv_residual(v, p, s); };
  op.noise_gain = [](const StencilSpec& s) {
    return combined_gain(s, [](const StencilSpec& t) { return gain3(t) + gain1(t); });
  };
  op.noise_scale = [v](EvalPoint p) { return sup_norm(sample(v, p)); };
  return op;
}

ResidualOperator mkdv_operator(const OperatorData& od, EvalPath path) {
  ResidualOperator op = mkdv_operator(soliton_sampler(od, path));
  op.noise_scale = route_noise(od);
  return op;
}

ResidualOperator kdv_operator(const OperatorData& od, int sign, EvalPath path) {
  Sampler v = soliton_sampler(od, path);
  ResidualOperator op;
  op.tag = "kdv";
  op.eval = [v, sign](EvalPoint p, const StencilSpec& s) {
    return kdv_residual(miura_sampler(v, s, sign), p, s);
  };
  // U carries the noise of one first difference; U_xxx and U_t amplify it.
  op.noise_gain = [](const StencilSpec& s) {
    return combined_gain(s, [](const StencilSpec& t) { return gain1(t) * (gain3(t) + gain1(t)); });
  };
  op.noise_scale = route_noise(od);
  return op;
}

ResidualOperator pkdv_operator(const OperatorData& od, int sign, QuadratureSpec q, EvalPath path) {
  Sampler v = soliton_sampler(od, path);
  ResidualOperator op;
  op.tag = "pkdv";
  op.eval = [v, sign, q](EvalPoint p, const StencilSpec& s) {
    const Sampler u = miura_sampler(v, s, sign);
    const double x_cut = find_decay_cut(u, stencil_times(p, s), p.x - 5.0, q);
    return pkdv_residual(potential_sampler(u, x_cut, q), u, p, s);
  };
  // W accumulates U noise over the integration span before W_t differences it.
  op.noise_gain = [](const StencilSpec& s) {
    return combined_gain(s, [](const StencilSpec& t) { return gain1(t) * (kQuadratureSpan * gain1(t) + gain2(t)); });
  };
  op.noise_scale = route_noise(od);
  return op;
}

ResidualReport residual_report(const ResidualOperator& op, const std::vector<EvalPoint>& points,
                               const StencilSpec& s) {
  check_stencil(s);
  const auto n = static_cast<std::ptrdiff_t>(points.size());
  std::vector<double> sup(points.size(), 0.0), sq(points.size(), 0.0);
  std::vector<std::size_t> entries(points.size(), 0);
  std::vector<char> skipped(points.size(), 0);
  std::vector<std::string> failure(points.size());

#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    try {
      const ComplexMatrix r = op.eval(points[k], s);
      sup[k] = sup_norm(r);
      for (const Complex& z : r.data()) sq[k] += std::norm(z);
      entries[k] = r.size();
    } catch (const StencilError&) {
      skipped[k] = 1;
    } catch (const std::exception& e) {
      failure[k] = e.what();
    }
  }

  ResidualReport rep;
  rep.equation = op.tag;
  rep.order = s.order;
  rep.h = s.h;
  double total_sq = 0.0;
  std::size_t total_entries = 0;
  for (std::size_t k = 0; k < points.size(); ++k) {
    if (!failure[k].empty()) throw Error(op.tag + " residual failed: " + failure[k]);
    if (skipped[k]) {
      ++rep.skipped;
      continue;
    }
    ++rep.samples;
    total_sq += sq[k];
    total_entries += entries[k];
    if (rep.samples == 1 || sup[k] > rep.sup) {
      rep.sup = sup[k];
      rep.worst = points[k];
    }
  }
  if (rep.samples == 0) throw Error(op.tag + " residual: every sample point is masked");
  rep.rms = std::sqrt(total_sq / double(total_entries));
  return rep;
}

double roundoff_floor(const ResidualOperator& op, const std::vector<EvalPoint>& points, const StencilSpec& s) {
  double mag = 0.0;
  for (const auto& p : points) {
    try {
      mag = std::max(mag, op.noise_scale(p));
    } catch (const Error&) {
    }
  }
  return std::numeric_limits<double>::epsilon() * op.noise_gain(s) * std::max(mag, 1e-300);
}

ResidualReport convergence_study(const ResidualOperator& op, const std::vector<EvalPoint>& points,
                                 const std::vector<double>& h_list, const StencilSpec& base) {
  if (h_list.size() < 2) throw Error("convergence study needs at least two step sizes");
  ResidualReport out;
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < h_list.size(); ++i) {
    StencilSpec s = base;
    s.h = h_list[i];
    const ResidualReport r = residual_report(op, points, s);
    if (i == 0) {
      out = r;
      out.steps.clear();
    }
    ConvergenceStep step{s.h, r.sup, r.rms, roundoff_floor(op, points, s)};
    out.steps.push_back(step);
    if (step.sup > 10.0 * step.floor) {
      lx.push_back(std::log(step.h));
      ly.push_back(std::log(step.sup));
    } else {
      out.roundoff_limited = true;
    }
  }
  for (std::size_t i = 0; i + 1 < out.steps.size(); ++i)
    out.halving_ratios.push_back(out.steps[i].sup / out.steps[i + 1].sup);

  if (lx.size() >= 2) {
    const double n = double(lx.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      sx += lx[i];
      sy += ly[i];
      sxx += lx[i] * lx[i];
      sxy += lx[i] * ly[i];
    }
    out.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  }
  return out;
}

MiuraProbe probe_miura_sign(const OperatorData& od, const std::vector<EvalPoint>& points,
                            const StencilSpec& s, double threshold, EvalPath path) {
  MiuraProbe probe;
  probe.sup_plus = residual_report(kdv_operator(od, 1, path), points, s).sup;
  probe.sup_minus = residual_report(kdv_operator(od, -1, path), points, s).sup;
  probe.plus_valid = probe.sup_plus <= threshold;
  probe.minus_valid = probe.sup_minus <= threshold;
  if (probe.plus_valid) {
    probe.selected = 1;
  } else if (probe.minus_valid) {
    probe.selected = -1;
  } else {
    probe.selected = probe.sup_minus < probe.sup_plus ? -1 : 1;
  }
  return probe;
}

std::vector<EvalPoint> sample_points(const GridSpec& g, std::size_t count, std::uint64_t seed,
                                     const std::function<bool(EvalPoint)>& accept) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(g.x_min, g.x_max), ut(g.t_min, g.t_max);
  std::vector<EvalPoint> out;
  for (std::size_t draw = 0; out.size() < count; ++draw) {
    if (draw >= 1000 * count) {
      throw Error("could not find " + std::to_string(count) + " admissible sample points in the window");
    }
    const EvalPoint p{ux(rng), ut(rng)};
    if (accept(p)) out.push_back(p);
  }
  return out;
}

std::function<bool(EvalPoint)> stencil_clear(const ResidualOperator& op, const StencilSpec& s) {
  return [op, s](EvalPoint p) {
    try {
      op.eval(p, s);
      return true;
    } catch (const StencilError&) {
      return false;
    }
  };
}

}  // namespace matsol
