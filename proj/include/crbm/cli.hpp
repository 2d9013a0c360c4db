#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace crbm {

/// Exit codes shared by every subcommand.
enum ExitCode : int { kExitOk = 0, kExitError = 1, kExitUsage = 2 };

/// Runs the command line `args` (program name excluded): train, generate,
/// energy or stats.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace crbm
