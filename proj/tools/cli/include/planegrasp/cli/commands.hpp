#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace planegrasp::cli {

/// Process exit codes. Part of the command-line contract; do not renumber.
enum ExitCode : int {
  kExitOk = 0,
  kExitIo = 2,
  kExitUntrainable = 3,
  kExitBadArgs = 4,
  kExitDuplicate = 5,
  kExitNotFound = 6,
};

/// Runs the `planegrasp` command line. `args` excludes the program name.
/// Records and tables go to `out`, diagnostics and timings to `err`;
/// `in` backs the "-" path (standard input).
int run_cli(const std::vector<std::string>& args, std::istream& in,
            std::ostream& out, std::ostream& err);

}  // namespace planegrasp::cli
