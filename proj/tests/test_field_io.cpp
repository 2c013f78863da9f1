#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "matsol/field_io.hpp"
#include "matsol/scenario_io.hpp"
#include "test_support.hpp"

using namespace matsol;

namespace {

MatrixField evaluate(const Scenario& s) { return evaluate_grid(build_operator_data(s), s.grid, s.options.path); }

Scenario small_fig(const char* name) {
  Scenario s = preset(name);
  s.grid = {-15.0, 15.0, 61, -6.0, 6.0, 25};
  return s;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("csv layout") {
  MatrixField f({0.0, 1.0, 2, 0.0, 0.5, 2}, 2);
  for (std::size_t k = 0; k < f.values.size(); ++k) f.values[k] = {double(k), -0.1 * double(k)};
  std::ostringstream os;
  write_csv(os, f);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "x,t,i,j,re,im");
  std::getline(in, line);
  CHECK(line == "0,0,0,0,0,-0");
  std::getline(in, line);
  CHECK(line == "0,0,0,1,1,-0.10000000000000001");
  for (int k = 0; k < 3; ++k) std::getline(in, line);
  CHECK(line.rfind("1,0,0,0,4,", 0) == 0);
  std::size_t rows = 0;
  std::istringstream all(os.str());
  while (std::getline(all, line)) ++rows;
  CHECK(rows == 1 + 16);
}

TEST_CASE("csv round trip is bit exact, including masked points") {
  const MatrixField f = evaluate(load_scenario(std::filesystem::path(MATSOL_SOURCE_DIR) / "scenarios" / "singular.yaml"));
  REQUIRE(f.masked_count() > 0);
  std::stringstream buf;
  write_csv(buf, f);
  const MatrixField back = read_csv(buf);
  CHECK(same_samples(f, back));
  CHECK(back.masked_count() == f.masked_count());

  std::mt19937_64 rng(3);
  Scenario r = testing::random_scenario(rng, 2, 2);
  const MatrixField g = evaluate(r);
  std::stringstream buf2;
  write_csv(buf2, g);
  CHECK(same_samples(g, read_csv(buf2)));
}

TEST_CASE("malformed csv") {
  std::istringstream no_header("1,2,0,0,1,1\n");
  CHECK_THROWS_AS(read_csv(no_header), Error);
  std::istringstream bad_number("x,t,i,j,re,im\n0,0,0,0,abc,0\n");
  CHECK_THROWS_WITH_AS(read_csv(bad_number), doctest::Contains("line 2"), Error);
  std::istringstream short_row("x,t,i,j,re,im\n0,0,0,0,1\n");
  CHECK_THROWS_AS(read_csv(short_row), Error);
  CHECK_THROWS_AS(read_csv(std::filesystem::path("/nonexistent/field.csv")), IoError);
}

TEST_CASE("colormap endpoints") {
  CHECK(colormap(0.0) == Rgb{0, 0, 26});
  CHECK(colormap(1.0) == Rgb{255, 255, 191});
  CHECK(colormap(-3.0) == colormap(0.0));
  CHECK(colormap(std::nan("")) == colormap(0.0));
  CHECK(colormap(7.0) == colormap(1.0));
}

TEST_CASE("ppm heatmaps") {
  const MatrixField f = evaluate(small_fig("fig2"));
  const std::string img = ppm_image(f, 0, 0, entry_range(f, 0, 0));
  const std::string header = "P6\n61 25\n255\n";
  REQUIRE(img.size() == header.size() + 3 * 61 * 25);
  CHECK(img.compare(0, header.size(), header) == 0);
  CHECK(img == ppm_image(f, 0, 0, entry_range(f, 0, 0)));

  SUBCASE("off-diagonal entries of the diagonal preset are flat") {
    for (auto [i, j] : {std::pair{0, 1}, {0, 2}, {1, 0}, {1, 1}, {2, 1}}) {
      CAPTURE(i);
      CAPTURE(j);
      const HeatmapScale s = entry_range(f, i, j);
      CHECK(s.flat());
      const std::string p = ppm_image(f, i, j, s);
      const Rgb zero = colormap(0.0);
      bool all_zero = true;
      for (std::size_t k = header.size(); k < p.size(); k += 3)
        all_zero = all_zero && Rgb{(unsigned char)p[k], (unsigned char)p[k + 1], (unsigned char)p[k + 2]} == zero;
      CHECK(all_zero);
    }
  }

  SUBCASE("per-image scale reaches both colormap ends") {
    const HeatmapScale s = entry_range(f, 0, 0);
    CHECK(s.hi > 1.0);
    bool has_top = false;
    for (std::size_t k = header.size(); k < img.size(); k += 3)
      has_top = has_top || Rgb{(unsigned char)img[k], (unsigned char)img[k + 1], (unsigned char)img[k + 2]} == colormap(1.0);
    CHECK(has_top);
  }

  SUBCASE("shared scale") {
    const MatrixField g = evaluate(small_fig("fig4"));
    const HeatmapScale shared = shared_range(g);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) {
        const HeatmapScale e = entry_range(g, i, j);
        CHECK(e.lo >= shared.lo);
        CHECK(e.hi <= shared.hi);
      }
    CHECK(ppm_image(g, 0, 2, shared) != ppm_image(g, 0, 2, entry_range(g, 0, 2)));
  }

  SUBCASE("top row is t_max") {
    MatrixField h({0.0, 1.0, 2, 0.0, 1.0, 2}, 1);
    h.values = {0.0, 0.0, 1.0, 1.0};
    const std::string p = ppm_image(h, 0, 0, entry_range(h, 0, 0));
    const std::size_t o = std::string("P6\n2 2\n255\n").size();
    CHECK((unsigned char)p[o] == colormap(1.0).r);
    CHECK((unsigned char)p[o + 6] == colormap(0.0).r);
  }

  SUBCASE("masked pixels are gray") {
    const MatrixField m = evaluate(load_scenario(std::filesystem::path(MATSOL_SOURCE_DIR) / "scenarios" / "singular.yaml"));
    const std::string p = ppm_image(m, 0, 0, entry_range(m, 0, 0));
    std::size_t gray = 0;
    const std::size_t o = std::string("P6\n201 21\n255\n").size();
    for (std::size_t k = o; k < p.size(); k += 3) gray += (unsigned char)p[k] == 128 && (unsigned char)p[k + 1] == 128;
    CHECK(gray == m.masked_count());
  }
}

TEST_CASE("files are byte-identical across runs") {
  const auto dir = std::filesystem::temp_directory_path() / "matsol_field_io_test";
  std::filesystem::create_directories(dir);
  const MatrixField f = evaluate(small_fig("fig3"));
  write_csv(dir / "a.csv", f);
  write_csv(dir / "b.csv", evaluate(small_fig("fig3")));
  CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
  write_ppm(dir / "a.ppm", f, 1, 2, entry_range(f, 1, 2));
  write_ppm(dir / "b.ppm", f, 1, 2, entry_range(f, 1, 2));
  CHECK(slurp(dir / "a.ppm") == slurp(dir / "b.ppm"));
  CHECK(same_samples(f, read_csv(dir / "a.csv")));
  std::filesystem::remove_all(dir);
  CHECK_THROWS_AS(write_text(dir / "nested" / "x.txt", "x"), IoError);
}

TEST_CASE("gnuplot script") {
  const std::string g = gnuplot_script("field.csv", 2, "fig");
  CHECK(g.find("set datafile separator ','") != std::string::npos);
  CHECK(g.find("'fig_22.png'") != std::string::npos);
  CHECK(g.find("$3 == 1 && $4 == 0") != std::string::npos);
}
