#pragma once

// RunReport: one JSON tree per run. The human-readable text is rendered from
// the same tree, so both forms print every number identically.

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "matsol/diagnostics.hpp"
#include "matsol/pde_verify.hpp"
#include "matsol/spectral.hpp"

namespace matsol {

using Json = nlohmann::ordered_json;

Json to_json(const Scenario& s);
Json to_json(const ResidualReport& r);
Json to_json(const MiuraProbe& p);
Json to_json(const ConservedSeries& s, bool include_values = false);
Json to_json(const PeakTrack& t);

class RunReport {
 public:
  explicit RunReport(std::string command);

  void set_scenario(const Scenario& s, const OperatorData& od);
  void set_mask(const MatrixField& f);
  void add_residual(const ResidualReport& r);
  void set_miura(const MiuraProbe& p);
  void add_series(const ConservedSeries& s);
  void set_partition(const EnergyPartition& p);
  void set_peaks(const PeakTrack& t);
  void add_heatmap(const std::string& file, std::size_t i, std::size_t j, double lo, double hi);
  void add_output(const std::string& file);
  void add_check(const std::string& id, const std::string& name, bool passed, const std::string& detail,
                 double seconds);
  void add_warning(const std::string& w);
  void add_timing(const std::string& phase, double seconds);
  void set_status(int exit_code, const std::string& message = {});

  const Json& json() const noexcept { return root_; }
  Json& json() noexcept { return root_; }

  std::string json_text() const;
  std::string human_text() const;

 private:
  Json& section(const char* key);
  Json root_;
};

/// Indented "key: value" rendering; numbers are printed with the JSON dumper.
std::string render_text(const Json& j);

}  // namespace matsol
