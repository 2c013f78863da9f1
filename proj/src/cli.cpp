#include "matsol/cli.hpp"

#include <chrono>
#include <filesystem>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "matsol/checks.hpp"
#include "matsol/diagnostics.hpp"
#include "matsol/field_io.hpp"
#include "matsol/pde_verify.hpp"
#include "matsol/report.hpp"
#include "matsol/scenario_io.hpp"

namespace matsol::cli {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Flags {
  std::string scenario_file;
  std::string preset_name;
  std::string path = "fast";
  double h = 1e-2;
  int order = 4;
  std::string out_dir = "matsol_out";
  bool shared_scale = false;
};

class Stopwatch {
 public:
  double lap() {
    const auto now = Clock::now();
    const double s = std::chrono::duration<double>(now - start_).count();
    start_ = now;
    return s;
  }

 private:
  Clock::time_point start_ = Clock::now();
};

struct Session {
  Flags flags;
  Scenario scenario;
  OperatorData od;
  RunReport report;
  fs::path dir;
  std::ostream& out;

  Session(const std::string& command, const Flags& f, std::ostream& o) : flags(f), report(command), out(o) {}

  void write(const std::string& name, const std::string& text) {
    write_text(dir / name, text);
    report.add_output(name);
  }
};

void prepare_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
}

Scenario load(const Flags& f) {
  if (!f.scenario_file.empty() && !f.preset_name.empty()) throw Error("--scenario and --preset are exclusive");
  if (f.scenario_file.empty() && f.preset_name.empty()) throw Error("one of --scenario or --preset is required");
  Scenario s = f.scenario_file.empty() ? preset(f.preset_name) : load_scenario(f.scenario_file);
  if (f.path == "det") s.options.path = EvalPath::det;
  else if (f.path == "fast") s.options.path = EvalPath::fast;
  return s;
}

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::setprecision(digits) << v;
  return os.str();
}

int finish(Session& s, int code, const std::string& message) {
  s.report.set_status(code, message);
  s.report.add_output("report.json");
  s.report.add_output("report.txt");
  write_text(s.dir / "report.json", s.report.json_text());
  write_text(s.dir / "report.txt", s.report.human_text());
  s.out << s.report.human_text();
  return code;
}

MatrixField evaluate_field(Session& s, Stopwatch& w) {
  MatrixField f = evaluate_grid(s.od, s.scenario.grid, s.scenario.options.path);
  s.report.add_timing("evaluate", w.lap());
  s.report.set_mask(f);
  return f;
}

int cmd_evaluate(Session& s) {
  Stopwatch w;
  const MatrixField f = evaluate_field(s, w);
  write_csv(s.dir / "field.csv", f);
  s.report.add_output("field.csv");
  s.report.add_timing("write", w.lap());
  return finish(s, ok, std::to_string(f.masked_count()) + " of " + std::to_string(f.state.size()) + " points masked");
}

int cmd_verify(Session& s) {
  StencilSpec base;
  base.h = s.flags.h;
  base.order = s.flags.order;
  check_stencil(base);
  Stopwatch w;
  const EvalPath path = s.scenario.options.path;
  const ResidualOperator mk = mkdv_operator(s.od, path);
  const auto pts = sample_points(s.scenario.grid, 25, CheckOptions{}.seed, stencil_clear(mk, base));
  s.report.add_timing("sampling", w.lap());

  std::vector<std::string> failures;
  auto gate = [&](const ResidualReport& r, double bound) {
    const bool pass = r.sup <= bound;
    s.report.add_check(r.equation, r.equation + " sup residual at h = " + fixed(r.h, 6), pass,
                       "sup " + fixed(r.sup, 3) + " (bound " + fixed(bound, 1) + ")", 0.0);
    if (!pass) failures.push_back(r.equation);
  };

  const ResidualReport rm = convergence_study(mk, pts, {base.h, base.h / 2, base.h / 4}, base);
  s.report.add_residual(rm);
  s.report.add_timing("mkdv", w.lap());
  gate(rm, kMkdvBound);

  const MiuraProbe probe = probe_miura_sign(s.od, pts, base, kChainBound, path);
  s.report.set_miura(probe);
  if (!probe.plus_valid && !probe.minus_valid)
    s.report.add_warning("no Miura sign gives a KdV residual below " + fixed(kChainBound, 1));
  const ResidualReport rk = convergence_study(kdv_operator(s.od, probe.selected, path), pts, {base.h, base.h / 2}, base);
  s.report.add_residual(rk);
  s.report.add_timing("kdv", w.lap());
  gate(rk, kChainBound);

  const ResidualReport rp =
      convergence_study(pkdv_operator(s.od, probe.selected, QuadratureSpec{}, path), pts, {base.h, base.h / 2}, base);
  s.report.add_residual(rp);
  s.report.add_timing("pkdv", w.lap());
  gate(rp, kChainBound);

  if (failures.empty()) return finish(s, ok, "all residuals within bounds");
  std::string msg = "bound exceeded:";
  for (const auto& f : failures) msg += " " + f;
  return finish(s, threshold, msg);
}

std::string series_table(const std::vector<ConservedSeries>& series) {
  std::ostringstream os;
  os << std::setprecision(17) << "t";
  for (const auto& c : series) os << "," << to_string(c.tag) << "_re," << to_string(c.tag) << "_im";
  os << "\n";
  if (series.empty()) return os.str();
  for (std::size_t k = 0; k < series.front().t.size(); ++k) {
    os << series.front().t[k];
    for (const auto& c : series) os << "," << c.value[k].real() << "," << c.value[k].imag();
    os << "\n";
  }
  return os.str();
}

std::string partition_table(const EnergyPartition& p) {
  std::ostringstream os;
  os << std::setprecision(17) << "t,i,j,energy\n";
  for (std::size_t k = 0; k < p.t.size(); ++k)
    for (std::size_t i = 0; i < p.d; ++i)
      for (std::size_t j = 0; j < p.d; ++j) os << p.t[k] << "," << i << "," << j << "," << p.entry(k, i, j) << "\n";
  return os.str();
}

std::string peak_table(const PeakTrack& t) {
  std::ostringstream os;
  os << std::setprecision(17) << "t,x,height\n";
  for (std::size_t k = 0; k < t.t.size(); ++k)
    for (const Peak& p : t.peaks[k]) os << t.t[k] << "," << p.x << "," << p.height << "\n";
  return os.str();
}

int cmd_diagnose(Session& s) {
  Stopwatch w;
  const MatrixField f = evaluate_field(s, w);
  SeriesOptions opt;
  opt.skip_invalid = true;

  std::vector<ConservedSeries> kept;
  for (auto tag : {Functional::trace_sq, Functional::frobenius, Functional::trace}) {
    try {
      kept.push_back(functional_series(f, tag, opt));
      s.report.add_series(kept.back());
    } catch (const Error& e) {
      s.report.add_warning(std::string(to_string(tag)) + ": " + e.what());
    }
  }
  try {
    const EnergyPartition p = energy_partition(f, opt);
    s.report.set_partition(p);
    s.write("partition.csv", partition_table(p));
  } catch (const Error& e) {
    s.report.add_warning(std::string("energy partition: ") + e.what());
  }
  const PeakTrack track = track_peaks(f, 0.1, s.scenario.n());
  s.report.set_peaks(track);
  s.report.add_timing("diagnostics", w.lap());

  if (!kept.empty()) s.write("series.csv", series_table(kept));
  s.write("peaks.csv", peak_table(track));
  s.report.add_timing("write", w.lap());
  return finish(s, ok, "diagnostics written");
}

int cmd_render(Session& s) {
  Stopwatch w;
  const MatrixField f = evaluate_field(s, w);
  write_csv(s.dir / "field.csv", f);
  s.report.add_output("field.csv");
  const HeatmapScale shared = shared_range(f);
  for (std::size_t i = 0; i < f.d; ++i)
    for (std::size_t j = 0; j < f.d; ++j) {
      const HeatmapScale scale = s.flags.shared_scale ? shared : entry_range(f, i, j);
      const std::string name = "V_" + std::to_string(i + 1) + std::to_string(j + 1) + ".ppm";
      write_ppm(s.dir / name, f, i, j, scale);
      s.report.add_heatmap(name, i, j, scale.lo, scale.hi);
    }
  s.write("plot.gp", gnuplot_script("field.csv", f.d, "V"));
  s.report.add_timing("write", w.lap());
  return finish(s, ok, std::to_string(f.d * f.d) + " heatmaps written");
}

int cmd_selftest(const Flags& flags, bool write_report, std::ostream& out) {
  RunReport report("selftest");
  bool all = true;
  auto record = [&](const std::vector<CheckResult>& results) {
    for (const auto& r : results) {
      out << format_check(r);
      report.add_check(r.id, r.name, r.passed, r.detail, r.seconds);
      for (const auto& n : r.notes) report.add_warning(r.id + ": " + n);
      all = all && r.passed;
    }
  };
  out << "module invariants\n";
  record(invariant_checks());
  out << "acceptance criteria\n";
  record(acceptance_checks());
  const int code = all ? ok : threshold;
  report.set_status(code, all ? "all checks passed" : "at least one check failed");
  if (write_report) {
    const fs::path dir(flags.out_dir);
    prepare_dir(dir);
    write_text(dir / "report.json", report.json_text());
    write_text(dir / "report.txt", report.human_text());
  }
  out << (all ? "selftest passed\n" : "selftest FAILED\n");
  return code;
}

void add_common(CLI::App* sub, Flags& f, bool scenario) {
  if (scenario) {
    auto* file = sub->add_option("--scenario", f.scenario_file, "Scenario document (YAML or JSON)");
    auto* name = sub->add_option("--preset", f.preset_name, "Built-in scenario")
                     ->check(CLI::IsMember(preset_names()));
    file->excludes(name);
    name->excludes(file);
    sub->add_option("--path", f.path, "Evaluation path")->check(CLI::IsMember({"det", "fast"}));
    sub->add_option("--h", f.h, "Finite-difference step")->check(CLI::PositiveNumber);
    sub->add_option("--order", f.order, "Stencil order")->check(CLI::IsMember({2, 4, 6}));
    sub->add_flag("--shared-scale", f.shared_scale, "One colour scale for every heatmap");
  }
  sub->add_option("--out", f.out_dir, "Output directory");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app("Matrix mKdV N-soliton solutions: evaluation, verification and export", "matsol");
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(1);
  Flags flags;
  CLI::App* evaluate = app.add_subcommand("evaluate", "Evaluate the field on the grid and write CSV");
  CLI::App* verify = app.add_subcommand("verify", "mKdV, KdV and pKdV residuals with a convergence study");
  CLI::App* diagnose = app.add_subcommand("diagnose", "Conserved-quantity candidates, energy partition, peaks");
  CLI::App* render = app.add_subcommand("render", "Heatmaps of |V_ij| and a gnuplot script");
  CLI::App* selftest = app.add_subcommand("selftest", "Module invariants and acceptance criteria");
  for (CLI::App* sub : {evaluate, verify, diagnose, render}) add_common(sub, flags, true);
  add_common(selftest, flags, false);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ok : invalid;
  }

  try {
    if (selftest->parsed()) return cmd_selftest(flags, selftest->count("--out") > 0, out);
    CLI::App* sub = app.get_subcommands().front();
    Session s(sub->get_name(), flags, out);
    s.scenario = load(flags);
    s.od = build_operator_data(s.scenario);
    s.report.set_scenario(s.scenario, s.od);
    s.dir = flags.out_dir;
    prepare_dir(s.dir);
    if (sub == evaluate) return cmd_evaluate(s);
    if (sub == verify) return cmd_verify(s);
    if (sub == diagnose) return cmd_diagnose(s);
    return cmd_render(s);
  } catch (const ScenarioParseError& e) {
    err << "matsol: " << e.what() << "\n";
    return invalid;
  } catch (const ValidationError& e) {
    err << "matsol: invalid scenario: " << e.what() << "\n";
    return invalid;
  } catch (const IoError& e) {
    err << "matsol: I/O error: " << e.what() << "\n";
    return io;
  } catch (const Error& e) {
    err << "matsol: " << e.what() << "\n";
    return invalid;
  }
}

}  // namespace matsol::cli
