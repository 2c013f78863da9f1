#pragma once

// Acceptance criteria and the per-module invariant suite behind `selftest`.

#include <cstdint>
#include <string>
#include <vector>

namespace matsol {

struct CheckResult {
  std::string id;
  std::string name;
  bool passed = false;
  std::string detail;
  /// Measurements printed alongside the verdict without affecting it.
  std::vector<std::string> notes;
  double seconds = 0.0;
  /// 0 = no runtime limit.
  double limit_seconds = 0.0;
};

struct CheckOptions {
  std::uint64_t seed = 20261017;
};

/// Criteria 1 to 9, in order. A criterion exceeding its runtime limit fails.
std::vector<CheckResult> acceptance_checks(const CheckOptions& opt = {});

/// Every module invariant; ids are "<module>.<n>".
std::vector<CheckResult> invariant_checks(const CheckOptions& opt = {});

/// "PASS|FAIL  <id>  <name>: <detail> (<seconds> s)" plus indented notes.
std::string format_check(const CheckResult& r);

}  // namespace matsol
