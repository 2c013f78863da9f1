#include "matsol/report.hpp"

#include <sstream>

namespace matsol {

namespace {

Json complex_json(Complex z) { return Json::array({z.real(), z.imag()}); }

Json matrix_json(const ComplexMatrix& m) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(complex_json(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json point_json(EvalPoint p) { return Json::array({p.x, p.t}); }

bool inline_value(const Json& j) {
  if (j.is_primitive()) return true;
  if (j.is_array()) {
    for (const auto& v : j)
      if (v.is_string() || !inline_value(v)) return false;
    return true;
  }
  return false;
}

std::string scalar_text(const Json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_array()) {
    std::string s = "[";
    for (std::size_t k = 0; k < j.size(); ++k) s += (k ? ", " : "") + scalar_text(j[k]);
    return s + "]";
  }
  return j.dump();
}

void render(std::ostringstream& os, const Json& j, int indent) {
  const std::string pad(static_cast<std::size_t>(indent), ' ');
  if (j.is_object()) {
    for (const auto& [key, value] : j.items()) {
      if (inline_value(value)) {
        os << pad << key << ": " << scalar_text(value) << "\n";
      } else if (value.empty()) {
        os << pad << key << ": (none)\n";
      } else {
        os << pad << key << ":\n";
        render(os, value, indent + 2);
      }
    }
  } else if (j.is_array()) {
    for (const auto& item : j) {
      if (inline_value(item)) {
        os << pad << "- " << scalar_text(item) << "\n";
      } else {
        std::ostringstream inner;
        render(inner, item, indent + 2);
        std::string text = inner.str();
        // First line of the item goes after the dash.
        os << pad << "- " << text.substr(static_cast<std::size_t>(indent) + 2);
      }
    }
  } else {
    os << pad << scalar_text(j) << "\n";
  }
}

}  // namespace

Json to_json(const Scenario& s) {
  Json j;
  j["label"] = s.label;
  j["d"] = s.d;
  j["n"] = s.n();
  Json sol = Json::array();
  for (const auto& e : s.entries) sol.push_back({{"k", complex_json(e.k)}, {"B", matrix_json(e.weight)}});
  j["solitons"] = std::move(sol);
  j["grid"] = {{"x", {s.grid.x_min, s.grid.x_max, s.grid.nx}}, {"t", {s.grid.t_min, s.grid.t_max, s.grid.nt}}};
  j["imaginary_weights"] = s.options.imaginary_weights;
  j["path"] = s.options.path == EvalPath::det ? "det" : "fast";
  return j;
}

Json to_json(const ResidualReport& r) {
  Json j;
  j["equation"] = r.equation;
  j["order"] = r.order;
  j["h"] = r.h;
  j["samples"] = r.samples;
  j["skipped"] = r.skipped;
  j["sup"] = r.sup;
  j["rms"] = r.rms;
  j["worst"] = point_json(r.worst);
  if (!r.steps.empty()) {
    Json steps = Json::array();
    for (const auto& s : r.steps) steps.push_back({{"h", s.h}, {"sup", s.sup}, {"rms", s.rms}, {"floor", s.floor}});
    j["convergence"] = std::move(steps);
    j["halving_ratios"] = r.halving_ratios;
    if (r.slope) {
      j["slope"] = *r.slope;
    } else {
      j["slope"] = nullptr;
    }
    j["roundoff_limited"] = r.roundoff_limited;
  }
  return j;
}

Json to_json(const MiuraProbe& p) {
  return {{"sup_plus", p.sup_plus},
          {"sup_minus", p.sup_minus},
          {"plus_valid", p.plus_valid},
          {"minus_valid", p.minus_valid},
          {"selected_sign", p.selected}};
}

Json to_json(const ConservedSeries& s, bool include_values) {
  Json j;
  j["functional"] = to_string(s.tag);
  j["slices"] = s.t.size();
  j["skipped_slices"] = s.skipped_t.size();
  if (!s.value.empty()) {
    j["first"] = complex_json(s.value.front());
    j["last"] = complex_json(s.value.back());
  }
  j["drift"] = s.drift;
  if (include_values) {
    Json rows = Json::array();
    for (std::size_t k = 0; k < s.t.size(); ++k) rows.push_back({s.t[k], s.value[k].real(), s.value[k].imag()});
    j["values"] = std::move(rows);
  }
  return j;
}

Json to_json(const PeakTrack& t) {
  Json j;
  std::size_t first = t.peaks.empty() ? 0 : t.peaks.front().size();
  std::size_t last = t.peaks.empty() ? 0 : t.peaks.back().size();
  j["peaks_first_slice"] = first;
  j["peaks_last_slice"] = last;
  Json sol = Json::array();
  for (const auto& s : t.solitons) {
    sol.push_back({{"speed_pre", s.speed_pre},
                   {"speed_post", s.speed_post},
                   {"height_pre", s.height_pre},
                   {"height_post", s.height_post},
                   {"samples_pre", s.samples_pre},
                   {"samples_post", s.samples_post}});
  }
  j["solitons"] = std::move(sol);
  j["warnings"] = t.warnings;
  return j;
}

RunReport::RunReport(std::string command) {
  root_["command"] = std::move(command);
  root_["status"] = {{"exit_code", 0}, {"message", ""}};
}

Json& RunReport::section(const char* key) {
  if (!root_.contains(key)) root_[key] = Json::array();
  return root_[key];
}

void RunReport::set_scenario(const Scenario& s, const OperatorData& od) {
  root_["scenario"] = to_json(s);
  root_["convention"] = s.options.imaginary_weights ? "imaginary_weights: every B_j multiplied by +i"
                                                    : "weights as written";
  root_["covector_rank"] = od.covector_rank;
  for (const auto& w : od.warnings) add_warning(w);
}

void RunReport::set_mask(const MatrixField& f) {
  std::size_t singular = 0, overflow = 0;
  for (auto s : f.state) {
    singular += s == PointState::singular;
    overflow += s == PointState::overflow;
  }
  root_["mask"] = {{"points", f.state.size()}, {"masked", singular + overflow}, {"singular", singular},
                   {"overflow", overflow}};
}

void RunReport::add_residual(const ResidualReport& r) { section("residuals").push_back(to_json(r)); }
void RunReport::set_miura(const MiuraProbe& p) { root_["miura_probe"] = to_json(p); }
void RunReport::add_series(const ConservedSeries& s) { section("functionals").push_back(to_json(s)); }

void RunReport::set_partition(const EnergyPartition& p) {
  Json j;
  j["slices"] = p.t.size();
  Json first = Json::array(), last = Json::array();
  if (!p.t.empty()) {
    for (double v : p.entries.front()) first.push_back(v);
    for (double v : p.entries.back()) last.push_back(v);
  }
  j["d"] = p.d;
  j["first_slice"] = std::move(first);
  j["last_slice"] = std::move(last);
  root_["energy_partition"] = std::move(j);
}

void RunReport::set_peaks(const PeakTrack& t) { root_["peaks"] = to_json(t); }

void RunReport::add_heatmap(const std::string& file, std::size_t i, std::size_t j, double lo, double hi) {
  section("heatmaps").push_back({{"file", file}, {"entry", {i + 1, j + 1}}, {"min", lo}, {"max", hi}});
}

void RunReport::add_output(const std::string& file) { section("outputs").push_back(file); }

void RunReport::add_check(const std::string& id, const std::string& name, bool passed, const std::string& detail,
                          double seconds) {
  section("checks").push_back(
      {{"id", id}, {"name", name}, {"result", passed ? "PASS" : "FAIL"}, {"detail", detail}, {"seconds", seconds}});
}

void RunReport::add_warning(const std::string& w) { section("warnings").push_back(w); }

void RunReport::add_timing(const std::string& phase, double seconds) {
  if (!root_.contains("timings")) root_["timings"] = Json::object();
  root_["timings"][phase] = seconds;
}

void RunReport::set_status(int exit_code, const std::string& message) {
  root_["status"] = {{"exit_code", exit_code}, {"message", message}};
}

std::string RunReport::json_text() const { return root_.dump(2) + "\n"; }

std::string RunReport::human_text() const { return "matsol run report\n\n" + render_text(root_); }

std::string render_text(const Json& j) {
  std::ostringstream os;
  render(os, j, 0);
  return os.str();
}

}  // namespace matsol
