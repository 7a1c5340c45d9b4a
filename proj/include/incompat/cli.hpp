#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace incompat {

/// Exit codes of the command-line front end.
enum ExitCode : int {
  kExitOk = 0,
  kExitIncompatible = 1,  // --assert-compatible found an OrderExchange failure
  kExitUsage = 2,
  kExitValidation = 3,
};

/// Runs one command line (without the program name). Results go to `out`,
/// diagnostics and usage errors to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace incompat
