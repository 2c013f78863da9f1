#pragma once

// Scenario documents (YAML; JSON is accepted as a subset) and built-in presets.
//
//   d: 3
//   solitons:
//     - k: [1, 0]                 # [re, im] or a bare real
//       B: [[1, 0, 0], [0, 0, 0], [0, 0, 1]]   # bare reals or [re, im] pairs
//   grid:
//     x: [-15, 15, 601]           # min, max, count
//     t: [-6, 6, 241]
//   options:                      # optional
//     imaginary_weights: true
//     path: fast                  # det | fast
//     label: fig2

#include <filesystem>
#include <string>
#include <vector>

#include "matsol/errors.hpp"
#include "matsol/spectral.hpp"

namespace matsol {

enum class ParseErrorKind { syntax, schema, validation };
const char* to_string(ParseErrorKind k) noexcept;

class ScenarioParseError : public Error {
 public:
  /// line and column are 1-based; 0 when unknown.
  ScenarioParseError(ParseErrorKind kind, const std::string& message, int line, int column,
                     std::vector<ValidationIssue> issues = {});
  ParseErrorKind kind() const noexcept { return kind_; }
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }
  const std::string& detail() const noexcept { return detail_; }
  const std::vector<ValidationIssue>& issues() const noexcept { return issues_; }

 private:
  ParseErrorKind kind_;
  int line_;
  int column_;
  std::string detail_;
  std::vector<ValidationIssue> issues_;
};

/// Structural and spectral validation; every error carries a position.
Scenario parse_scenario(const std::string& document);

/// Throws IoError when the file cannot be read.
Scenario load_scenario(const std::filesystem::path& path);

/// fig2 | fig3 | fig4 | scalar1 | scalar2
Scenario preset(const std::string& name);
const std::vector<std::string>& preset_names();

/// Document that parse_scenario maps back to s (numbers with 17 digits).
std::string scenario_to_yaml(const Scenario& s);

}  // namespace matsol
