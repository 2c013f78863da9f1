#pragma once

// Exploratory diagnostics on evaluated fields: candidate conserved
// functionals, per-entry energy partition and peak tracking.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "matsol/soliton.hpp"

namespace matsol {

/// Composite Simpson on equally spaced samples; an odd interval count closes
/// with the 3/8 rule, two samples fall back to the trapezoid.
double simpson(std::span<const double> f, double dx);
Complex simpson(std::span<const Complex> f, double dx);

enum class Functional { trace_sq, frobenius, trace };
const char* to_string(Functional f) noexcept;

struct SeriesOptions {
  /// |V| at both x ends must be below this.
  double decay_tol = 1e-8;
  /// Skip slices with masked points instead of failing.
  bool skip_invalid = false;
};

struct ConservedSeries {
  Functional tag = Functional::frobenius;
  std::vector<double> t;
  std::vector<Complex> value;
  /// max |f(t) - f(t0)| / max(|f(t0)|, 1e-30), t0 the first kept slice.
  double drift = 0.0;
  std::vector<double> skipped_t;
};

/// Throws WindowError when a tail is not decayed, Error when a slice is
/// masked and skip_invalid is off.
ConservedSeries functional_series(const MatrixField& f, Functional tag, const SeriesOptions& opt = {});

struct EnergyPartition {
  std::size_t d = 0;
  std::vector<double> t;
  /// entries[k][i * d + j] = int |V_ij(x, t_k)|^2 dx
  std::vector<std::vector<double>> entries;
  std::vector<double> skipped_t;

  double entry(std::size_t k, std::size_t i, std::size_t j) const { return entries[k][i * d + j]; }
  /// Sum over entries at slice k.
  double total(std::size_t k) const;
};

EnergyPartition energy_partition(const MatrixField& f, const SeriesOptions& opt = {});

struct Peak {
  double x = 0.0;
  double height = 0.0;
};

struct SolitonFit {
  double speed_pre = 0.0;
  double speed_post = 0.0;
  double height_pre = 0.0;
  double height_post = 0.0;
  std::size_t samples_pre = 0;
  std::size_t samples_post = 0;
};

struct PeakTrack {
  std::vector<double> t;
  std::vector<std::vector<Peak>> peaks;  // per t slice
  /// One per soliton, ordered by decreasing pre-collision height.
  std::vector<SolitonFit> solitons;
  std::vector<std::string> warnings;
};

/// Local maxima of |V(., t)|_F above min_height with parabolic refinement.
std::vector<Peak> slice_peaks(const MatrixField& f, std::size_t it, double min_height);

/// Pre/post windows are the first and last 20% of the t range. Peaks are
/// continued from slice to slice by nearest position with at most 5 grid
/// cells of travel. `expected` (0 = unknown) only drives warnings.
PeakTrack track_peaks(const MatrixField& f, double min_height, std::size_t expected = 0);

}  // namespace matsol
