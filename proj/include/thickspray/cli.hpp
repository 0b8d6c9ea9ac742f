#pragma once

#include <iosfwd>

namespace thickspray {

/// Exit codes of the command line tool.
enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitRefused = 2, kExitNumerical = 3 };

/// Runs one subcommand (simulate, penrose-check, avgop-bench, flow-test).
/// Human-readable logs go to `out`, problems to `err`.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace thickspray
