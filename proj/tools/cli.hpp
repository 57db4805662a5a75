#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sc2d::cli {

/// Process exit codes.
enum ExitCode : int {
    kOk = 0,
    kCheckFailed = 1,  ///< `check` found a failing oracle comparison
    kBadArgs = 2,      ///< unparsable or invalid arguments, incompatible shapes
    kIoError = 3,      ///< missing or malformed input, unwritable output
    kSolverError = 4,  ///< numerical failure inside a solver
};

/// Runs the command line `args` (without the program name). Normal output
/// goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sc2d::cli
