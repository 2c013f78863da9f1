#include "matsol/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "matsol/errors.hpp"

namespace matsol {

namespace {

template <typename T>
T simpson_impl(std::span<const T> f, double dx) {
  const std::size_t n = f.size();
  if (n < 2) return T{};
  if (n == 2) return 0.5 * dx * (f[0] + f[1]);
  const std::size_t intervals = n - 1;
  // Simpson over an even number of intervals, 3/8 rule on the last three if odd.
  const std::size_t even = intervals % 2 == 0 ? intervals : intervals - 3;
  T acc{};
  if (even > 0) {
    T s = f[0] + f[even];
    for (std::size_t i = 1; i < even; ++i) s += (i % 2 ? 4.0 : 2.0) * f[i];
    acc = s * (dx / 3.0);
  }
  if (even != intervals) {
    const std::size_t k = even;
    acc += (3.0 * dx / 8.0) * (f[k] + 3.0 * f[k + 1] + 3.0 * f[k + 2] + f[k + 3]);
  }
  return acc;
}

double point_norm(const MatrixField& f, std::size_t ix, std::size_t it) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.d; ++i)
    for (std::size_t j = 0; j < f.d; ++j) s += std::norm(f.entry(ix, it, i, j));
  return std::sqrt(s);
}

bool slice_masked(const MatrixField& f, std::size_t it) {
  for (std::size_t ix = 0; ix < f.grid.nx; ++ix)
    if (f.masked(ix, it)) return true;
  return false;
}

// Shared slice screening for the integral diagnostics. Returns false when the
// slice is to be skipped.
bool admit_slice(const MatrixField& f, std::size_t it, const SeriesOptions& opt) {
  const double t = f.grid.t_at(it);
  if (slice_masked(f, it)) {
    if (opt.skip_invalid) return false;
    std::ostringstream os;
    os << "masked points on the slice t = " << t;
    throw Error(os.str());
  }
  const double left = point_norm(f, 0, it);
  const double right = point_norm(f, f.grid.nx - 1, it);
  if (!(left < opt.decay_tol) || !(right < opt.decay_tol)) {
    std::ostringstream os;
    os << "window too small: |V| = " << (left >= right ? left : right) << " at the "
       << (left >= right ? "left" : "right") << " boundary x = "
       << (left >= right ? f.grid.x_min : f.grid.x_max) << ", t = " << t << " (tolerance "
       << opt.decay_tol << ")";
    throw WindowError(os.str());
  }
  return true;
}

struct Sample {
  double t, x, height;
};

struct Track {
  std::vector<Sample> samples;
  bool active = true;
};

std::vector<Track> continue_peaks(const MatrixField& f, const std::vector<std::vector<Peak>>& peaks,
                                  std::size_t first, std::size_t last) {
  const double max_jump = 5.0 * f.grid.dx();
  std::vector<Track> tracks;
  for (std::size_t it = first; it <= last; ++it) {
    const auto& cur = peaks[it];
    const double t = f.grid.t_at(it);
    std::vector<char> claimed(cur.size(), 0);
    std::vector<char> extended(tracks.size(), 0);

    struct Pair {
      double dist;
      std::size_t track, peak;
    };
    std::vector<Pair> pairs;
    for (std::size_t k = 0; k < tracks.size(); ++k) {
      if (!tracks[k].active) continue;
      for (std::size_t p = 0; p < cur.size(); ++p) {
        const double dist = std::abs(cur[p].x - tracks[k].samples.back().x);
        if (dist <= max_jump) pairs.push_back({dist, k, p});
      }
    }
    std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) { return a.dist < b.dist; });
    for (const Pair& pr : pairs) {
      if (claimed[pr.peak] || extended[pr.track]) continue;
      claimed[pr.peak] = extended[pr.track] = 1;
      tracks[pr.track].samples.push_back({t, cur[pr.peak].x, cur[pr.peak].height});
    }
    for (std::size_t k = 0; k < extended.size(); ++k)
      if (!extended[k]) tracks[k].active = false;
    for (std::size_t p = 0; p < cur.size(); ++p)
      if (!claimed[p]) tracks.push_back({{{t, cur[p].x, cur[p].height}}, true});
  }
  return tracks;
}

struct WindowFit {
  double speed, height;
  std::size_t samples;
};

std::vector<WindowFit> fit_window(const std::vector<Track>& tracks, std::size_t slices) {
  std::vector<WindowFit> out;
  for (const Track& tr : tracks) {
    const std::size_t n = tr.samples.size();
    if (n < 2 || 2 * n < slices) continue;
    double st = 0, sx = 0, stt = 0, stx = 0, sh = 0;
    for (const Sample& s : tr.samples) {
      st += s.t;
      sx += s.x;
      stt += s.t * s.t;
      stx += s.t * s.x;
      sh += s.height;
    }
    const double m = double(n);
    out.push_back({(m * stx - st * sx) / (m * stt - st * st), sh / m, n});
  }
  std::stable_sort(out.begin(), out.end(), [](const WindowFit& a, const WindowFit& b) { return a.height > b.height; });
  return out;
}

}  // namespace

double simpson(std::span<const double> f, double dx) { return simpson_impl(f, dx); }
Complex simpson(std::span<const Complex> f, double dx) { return simpson_impl(f, dx); }

const char* to_string(Functional f) noexcept {
  switch (f) {
    case Functional::trace_sq: return "trace_sq";
    case Functional::frobenius: return "frobenius";
    case Functional::trace: return "trace";
  }
  return "unknown";
}

ConservedSeries functional_series(const MatrixField& f, Functional tag, const SeriesOptions& opt) {
  ConservedSeries out;
  out.tag = tag;
  const std::size_t nx = f.grid.nx, d = f.d;
  std::vector<Complex> integrand(nx);
  for (std::size_t it = 0; it < f.grid.nt; ++it) {
    if (!admit_slice(f, it, opt)) {
      out.skipped_t.push_back(f.grid.t_at(it));
      continue;
    }
    for (std::size_t ix = 0; ix < nx; ++ix) {
      Complex acc = 0.0;
      switch (tag) {
        case Functional::trace_sq:
          for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) acc += f.entry(ix, it, i, j) * f.entry(ix, it, j, i);
          break;
        case Functional::frobenius:
          for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) acc += std::norm(f.entry(ix, it, i, j));
          break;
        case Functional::trace:
          for (std::size_t i = 0; i < d; ++i) acc += f.entry(ix, it, i, i);
          break;
      }
      integrand[ix] = acc;
    }
    out.t.push_back(f.grid.t_at(it));
    out.value.push_back(simpson(std::span<const Complex>(integrand), f.grid.dx()));
  }
  if (!out.value.empty()) {
    const Complex f0 = out.value.front();
    const double denom = std::max(std::abs(f0), 1e-30);
    for (const Complex& v : out.value) out.drift = std::max(out.drift, std::abs(v - f0) / denom);
  }
  return out;
}

double EnergyPartition::total(std::size_t k) const {
  double s = 0.0;
  for (double v : entries[k]) s += v;
  return s;
}

EnergyPartition energy_partition(const MatrixField& f, const SeriesOptions& opt) {
  EnergyPartition out;
  out.d = f.d;
  const std::size_t nx = f.grid.nx, d = f.d;
  std::vector<double> integrand(nx);
  for (std::size_t it = 0; it < f.grid.nt; ++it) {
    if (!admit_slice(f, it, opt)) {
      out.skipped_t.push_back(f.grid.t_at(it));
      continue;
    }
    std::vector<double> row(d * d);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t ix = 0; ix < nx; ++ix) integrand[ix] = std::norm(f.entry(ix, it, i, j));
        row[i * d + j] = simpson(std::span<const double>(integrand), f.grid.dx());
      }
    out.t.push_back(f.grid.t_at(it));
    out.entries.push_back(std::move(row));
  }
  return out;
}

std::vector<Peak> slice_peaks(const MatrixField& f, std::size_t it, double min_height) {
  std::vector<Peak> out;
  const std::size_t nx = f.grid.nx;
  if (nx < 3) throw Error("peak tracking needs at least 3 grid points in x");
  const double dx = f.grid.dx();
  std::vector<double> n(nx);
  for (std::size_t ix = 0; ix < nx; ++ix) n[ix] = f.masked(ix, it) ? std::nan("") : point_norm(f, ix, it);
  for (std::size_t ix = 1; ix + 1 < nx; ++ix) {
    const double a = n[ix - 1], b = n[ix], c = n[ix + 1];
    if (!(b > a && b >= c && b > min_height)) continue;
    const double curv = a - 2.0 * b + c;
    const double delta = curv < 0.0 ? 0.5 * (a - c) / curv : 0.0;
    out.push_back({f.grid.x_at(ix) + delta * dx, b - 0.25 * (a - c) * delta});
  }
  return out;
}

PeakTrack track_peaks(const MatrixField& f, double min_height, std::size_t expected) {
  PeakTrack out;
  const std::size_t nt = f.grid.nt;
  for (std::size_t it = 0; it < nt; ++it) {
    out.t.push_back(f.grid.t_at(it));
    out.peaks.push_back(slice_peaks(f, it, min_height));
  }
  if (nt < 2) {
    out.warnings.push_back("a single t slice carries no speed information");
    return out;
  }

  const std::size_t window = std::max<std::size_t>(2, static_cast<std::size_t>(std::floor(0.2 * double(nt - 1))) + 1);
  const auto pre = fit_window(continue_peaks(f, out.peaks, 0, window - 1), window);
  const auto post = fit_window(continue_peaks(f, out.peaks, nt - window, nt - 1), window);

  auto check_count = [&](const char* name, std::size_t got) {
    if (expected != 0 && got != expected) {
      out.warnings.push_back(std::string(name) + "-collision window: found " + std::to_string(got) +
                             " peaks, expected " + std::to_string(expected));
    }
  };
  check_count("pre", pre.size());
  check_count("post", post.size());
  if (pre.size() != post.size()) {
    out.warnings.push_back("peak counts differ between the pre- and post-collision windows (" +
                           std::to_string(pre.size()) + " vs " + std::to_string(post.size()) + ")");
  }
  for (std::size_t k = 0; k < std::min(pre.size(), post.size()); ++k) {
    out.solitons.push_back({pre[k].speed, post[k].speed, pre[k].height, post[k].height, pre[k].samples,
                            post[k].samples});
  }
  return out;
}

}  // namespace matsol
