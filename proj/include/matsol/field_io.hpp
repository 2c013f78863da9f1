#pragma once

// Export of MatrixField: CSV (x,t,i,j,re,im; t-major, then x, i, j; 17
// significant digits), binary PPM heatmaps of |V_ij| and a gnuplot script.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "matsol/soliton.hpp"

namespace matsol {

void write_csv(std::ostream& out, const MatrixField& f);
/// Throws IoError.
void write_csv(const std::filesystem::path& path, const MatrixField& f);

/// Rebuilds grid, values and mask. Masked rows (nan) come back as singular
/// points with mask_detail 0; values are bit-identical to what was written.
/// Throws Error on malformed input, IoError when the file cannot be read.
MatrixField read_csv(std::istream& in);
MatrixField read_csv(const std::filesystem::path& path);

/// Grids, masks and value bits agree (mask kinds and details are ignored).
bool same_samples(const MatrixField& a, const MatrixField& b) noexcept;

struct HeatmapScale {
  double lo = 0.0;
  double hi = 0.0;
  /// hi - lo <= 1e-14: every unmasked pixel gets the zero colour.
  bool flat() const noexcept { return !(hi - lo > 1e-14); }
};

/// Min and max of |V_ij| over unmasked points.
HeatmapScale entry_range(const MatrixField& f, std::size_t i, std::size_t j);
/// Min and max over every entry.
HeatmapScale shared_range(const MatrixField& f);

struct Rgb {
  unsigned char r, g, b;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Colour for a level in [0, 1] (clamped).
Rgb colormap(double level) noexcept;
inline constexpr Rgb kMaskedColour{128, 128, 128};

/// P6 image, width nx, height nt, top row t_max.
std::string ppm_image(const MatrixField& f, std::size_t i, std::size_t j, const HeatmapScale& scale);
void write_ppm(const std::filesystem::path& path, const MatrixField& f, std::size_t i, std::size_t j,
               const HeatmapScale& scale);

/// gnuplot command file plotting |V_ij| from the CSV, one PNG per entry.
std::string gnuplot_script(const std::string& csv_name, std::size_t d, const std::string& stem);

/// Writes text to a file, throwing IoError on failure.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace matsol
