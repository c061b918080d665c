#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace rdc {

/// Exit codes of the rdcsim command.
enum ExitCode : int {
  kExitOk = 0,
  kExitValidation = 1,  // bad flags, malformed input
  kExitRuntime = 2,     // simulation or I/O failure
  kExitMismatch = 3,    // verify or reproduction disagreed with expectations
};

/// rdcsim entry point. `args` excludes the program name. The summary
/// document goes to `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rdc
