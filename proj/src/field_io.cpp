#include "matsol/field_io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "matsol/errors.hpp"

namespace matsol {

namespace {

void append_number(std::string& out, double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
  out.append(buf.data(), res.ptr);
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("error while writing " + path.string());
}

struct Row {
  double x, t;
  std::size_t i, j;
  double re, im;
};

[[noreturn]] void malformed(std::size_t line, const std::string& why) {
  throw Error("malformed CSV at line " + std::to_string(line) + ": " + why);
}

double parse_double(std::string_view s, std::size_t line) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) malformed(line, "bad number `" + std::string(s) + "`");
  return v;
}

std::size_t parse_index(std::string_view s, std::size_t line) {
  std::size_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) malformed(line, "bad index `" + std::string(s) + "`");
  return v;
}

Row parse_row(const std::string& text, std::size_t line) {
  std::array<std::string_view, 6> f;
  std::size_t start = 0, k = 0;
  for (std::size_t pos = 0; pos <= text.size(); ++pos) {
    if (pos == text.size() || text[pos] == ',') {
      if (k == 6) malformed(line, "more than 6 fields");
      f[k++] = std::string_view(text).substr(start, pos - start);
      start = pos + 1;
    }
  }
  if (k != 6) malformed(line, "expected 6 fields");
  return {parse_double(f[0], line), parse_double(f[1], line), parse_index(f[2], line),
          parse_index(f[3], line),  parse_double(f[4], line), parse_double(f[5], line)};
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

void write_csv(std::ostream& out, const MatrixField& f) {
  std::string buf;
  buf.reserve(1 << 16);
  out << "x,t,i,j,re,im\n";
  for (std::size_t it = 0; it < f.grid.nt; ++it) {
    const double t = f.grid.t_at(it);
    for (std::size_t ix = 0; ix < f.grid.nx; ++ix) {
      const double x = f.grid.x_at(ix);
      for (std::size_t i = 0; i < f.d; ++i)
        for (std::size_t j = 0; j < f.d; ++j) {
          const Complex v = f.entry(ix, it, i, j);
          append_number(buf, x);
          buf += ',';
          append_number(buf, t);
          buf += ',';
          buf += std::to_string(i);
          buf += ',';
          buf += std::to_string(j);
          buf += ',';
          append_number(buf, v.real());
          buf += ',';
          append_number(buf, v.imag());
          buf += '\n';
        }
      if (buf.size() > (1 << 16) - 512) {
        out << buf;
        buf.clear();
      }
    }
  }
  out << buf;
}

void write_csv(const std::filesystem::path& path, const MatrixField& f) {
  auto out = open_out(path);
  write_csv(out, f);
  finish(out, path);
}

MatrixField read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "x,t,i,j,re,im") throw Error("malformed CSV: missing header `x,t,i,j,re,im`");
  std::vector<Row> rows;
  for (std::size_t n = 2; std::getline(in, line); ++n) {
    if (line.empty()) continue;
    rows.push_back(parse_row(line, n));
  }
  if (rows.empty()) throw Error("malformed CSV: no data rows");

  std::size_t d = 0;
  for (const Row& r : rows) d = std::max({d, r.i + 1, r.j + 1});
  const std::size_t per_point = d * d;
  if (rows.size() % per_point != 0) throw Error("malformed CSV: row count is not a multiple of d^2");
  const std::size_t points = rows.size() / per_point;

  std::size_t nx = 1;
  while (nx < points && rows[nx * per_point].t == rows[0].t) ++nx;
  if (points % nx != 0) throw Error("malformed CSV: rows do not form a rectangular grid");
  const std::size_t nt = points / nx;
  GridSpec g{rows[0].x, rows[(nx - 1) * per_point].x, nx, rows[0].t, rows[rows.size() - 1].t, nt};

  MatrixField f(g, d);
  for (std::size_t p = 0; p < points; ++p) {
    const std::size_t ix = p % nx, it = p / nx;
    bool masked = false;
    for (std::size_t e = 0; e < per_point; ++e) {
      const Row& r = rows[p * per_point + e];
      const std::size_t line = p * per_point + e + 2;
      if (r.i != e / d || r.j != e % d) malformed(line, "entry indices out of order");
      if (!same_bits(r.x, g.x_at(ix)) || !same_bits(r.t, g.t_at(it))) malformed(line, "coordinates are not on the grid");
      f.values[p * per_point + e] = {r.re, r.im};
      masked = masked || std::isnan(r.re) || std::isnan(r.im);
    }
    if (masked) f.state[p] = PointState::singular;
  }
  return f;
}

MatrixField read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  return read_csv(in);
}

bool same_samples(const MatrixField& a, const MatrixField& b) noexcept {
  if (!(a.grid == b.grid) || a.d != b.d || a.values.size() != b.values.size()) return false;
  for (std::size_t k = 0; k < a.state.size(); ++k)
    if ((a.state[k] == PointState::regular) != (b.state[k] == PointState::regular)) return false;
  return std::memcmp(a.values.data(), b.values.data(), a.values.size() * sizeof(Complex)) == 0;
}

HeatmapScale entry_range(const MatrixField& f, std::size_t i, std::size_t j) {
  HeatmapScale s{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (std::size_t it = 0; it < f.grid.nt; ++it)
    for (std::size_t ix = 0; ix < f.grid.nx; ++ix) {
      if (f.masked(ix, it)) continue;
      const double a = std::abs(f.entry(ix, it, i, j));
      s.lo = std::min(s.lo, a);
      s.hi = std::max(s.hi, a);
    }
  if (s.lo > s.hi) s = {0.0, 0.0};
  return s;
}

HeatmapScale shared_range(const MatrixField& f) {
  HeatmapScale s{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < f.d; ++i)
    for (std::size_t j = 0; j < f.d; ++j) {
      const HeatmapScale e = entry_range(f, i, j);
      s.lo = std::min(s.lo, e.lo);
      s.hi = std::max(s.hi, e.hi);
    }
  return s;
}

Rgb colormap(double level) noexcept {
  // Dark blue -> purple -> orange -> pale yellow.
  static constexpr std::array<std::array<double, 3>, 5> stops{{
      {0.0, 0.0, 0.1},
      {0.25, 0.05, 0.45},
      {0.65, 0.15, 0.45},
      {0.95, 0.5, 0.1},
      {1.0, 1.0, 0.75},
  }};
  if (!(level > 0.0)) level = 0.0;
  if (level > 1.0) level = 1.0;
  const double pos = level * double(stops.size() - 1);
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(pos), stops.size() - 2);
  const double w = pos - double(k);
  auto channel = [&](int c) {
    const double v = (1.0 - w) * stops[k][c] + w * stops[k + 1][c];
    return static_cast<unsigned char>(std::lround(255.0 * v));
  };
  return {channel(0), channel(1), channel(2)};
}

std::string ppm_image(const MatrixField& f, std::size_t i, std::size_t j, const HeatmapScale& scale) {
  const std::size_t w = f.grid.nx, h = f.grid.nt;
  std::string out = "P6\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  const std::size_t header = out.size();
  out.resize(header + 3 * w * h);
  const double span = scale.hi - scale.lo;
  for (std::size_t row = 0; row < h; ++row) {
    const std::size_t it = h - 1 - row;
    for (std::size_t ix = 0; ix < w; ++ix) {
      Rgb c = kMaskedColour;
      if (!f.masked(ix, it)) {
        const double level = scale.flat() ? 0.0 : (std::abs(f.entry(ix, it, i, j)) - scale.lo) / span;
        c = colormap(level);
      }
      const std::size_t o = header + 3 * (row * w + ix);
      out[o] = static_cast<char>(c.r);
      out[o + 1] = static_cast<char>(c.g);
      out[o + 2] = static_cast<char>(c.b);
    }
  }
  return out;
}

void write_ppm(const std::filesystem::path& path, const MatrixField& f, std::size_t i, std::size_t j,
               const HeatmapScale& scale) {
  write_text(path, ppm_image(f, i, j, scale));
}

std::string gnuplot_script(const std::string& csv_name, std::size_t d, const std::string& stem) {
  std::ostringstream os;
  os << "# |V_ij| from " << csv_name << " (columns x,t,i,j,re,im)\n";
  os << "set datafile separator ','\n";
  os << "set terminal pngcairo size 900,500\n";
  os << "set xlabel 'x'\nset ylabel 't'\nset palette defined (0 '#00001a', 1 '#400d73', 2 '#a62673', 3 '#f2801a', 4 '#ffffbf')\n";
  os << "set view map\nunset key\n";
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      os << "set output '" << stem << "_" << i + 1 << j + 1 << ".png'\n";
      os << "set title '|V_{" << i + 1 << j + 1 << "}|'\n";
      os << "plot '" << csv_name << "' every ::1 using 1:2:(($3 == " << i << " && $4 == " << j
         << ") ? sqrt($5**2 + $6**2) : 1/0) with points pointtype 5 pointsize 0.3 palette\n";
    }
  return os.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  auto out = open_out(path);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  finish(out, path);
}

}  // namespace matsol
