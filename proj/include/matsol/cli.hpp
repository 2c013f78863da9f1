#pragma once

// matsol <subcommand> [--scenario FILE | --preset NAME] [--path det|fast]
//        [--h STEP] [--order 2|4|6] [--out DIR] [--shared-scale]

#include <iosfwd>
#include <string>
#include <vector>

namespace matsol::cli {

enum ExitCode : int { ok = 0, invalid = 1, threshold = 2, io = 3 };

/// Verification bounds applied by `verify`.
inline constexpr double kMkdvBound = 1e-5;
inline constexpr double kChainBound = 1e-4;

/// args excludes the program name. The human-readable report goes to out,
/// diagnostics to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace matsol::cli
