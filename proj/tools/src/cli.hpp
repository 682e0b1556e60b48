#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace stcpd::cli {

/// Process exit codes shared by every subcommand.
enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitUsage = 2,
  kExitInput = 3,
  kExitNumeric = 4,
};

/// Runs the command line `args` (args[0] is the program name). Reports and
/// diagnostics go to `out` and `err`; the return value is an ExitCode.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace stcpd::cli
