// Serial reference vs OpenMP grid kernel, and residual sampling cost.
//
//   bench_grid [--repeat N] [--preset NAME]...

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "matsol/pde_verify.hpp"
#include "matsol/scenario_io.hpp"
#include "matsol/soliton.hpp"

#ifdef MATSOL_HAVE_OPENMP
#include <omp.h>
#endif

using namespace matsol;

namespace {

template <class F>
double best_of(int repeat, F&& f) {
  double best = 1e300;
  for (int r = 0; r < repeat; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app("grid kernel benchmark", "bench_grid");
  int repeat = 3;
  std::vector<std::string> names{"fig2", "fig3", "fig4", "scalar2"};
  app.add_option("--repeat", repeat, "Runs per measurement (best is reported)")->check(CLI::PositiveNumber);
  app.add_option("--preset", names, "Presets to time")->check(CLI::IsMember(preset_names()));
  CLI11_PARSE(app, argc, argv);

#ifdef MATSOL_HAVE_OPENMP
  std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
  std::printf("OpenMP disabled\n");
#endif
  std::printf("%-8s %-5s %9s %11s %11s %8s %9s\n", "preset", "path", "points", "serial s", "openmp s", "speedup",
              "identical");
  for (const auto& name : names) {
    const Scenario s = preset(name);
    const OperatorData od = build_operator_data(s);
    for (EvalPath path : {EvalPath::fast, EvalPath::det}) {
      MatrixField a, b;
      const double ts = best_of(repeat, [&] { a = evaluate_grid_serial(od, s.grid, path); });
      const double tp = best_of(repeat, [&] { b = evaluate_grid_parallel(od, s.grid, path); });
      std::printf("%-8s %-5s %9zu %11.4f %11.4f %8.2f %9s\n", name.c_str(), path == EvalPath::fast ? "fast" : "det",
                  s.grid.points(), ts, tp, ts / tp, identical(a, b) ? "yes" : "NO");
    }
  }

  std::printf("\nmKdV residual, 200 points, order 4, h = 1e-2\n");
  for (const auto& name : names) {
    const Scenario s = preset(name);
    const OperatorData od = build_operator_data(s);
    const ResidualOperator op = mkdv_operator(od);
    const StencilSpec st;
    const auto pts = sample_points(s.grid, 200, 1, stencil_clear(op, st));
    const double t = best_of(repeat, [&] { residual_report(op, pts, st); });
    std::printf("%-8s %9.4f s\n", name.c_str(), t);
  }
  return 0;
}
