#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace predrobust::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitError = 1,
  kExitRejected = 2,
  kExitUsage = 64,
};

/// Runs the command line `args` (program name excluded). Results go to `out`,
/// the resolved-configuration echo and diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace predrobust::cli
