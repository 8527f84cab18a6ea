#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ehspc::cli {

enum ExitCode {
  kExitOk = 0,
  kExitFailure = 1,     // anything not classified below
  kExitUsage = 2,       // unknown flag, missing argument
  kExitConfig = 3,      // bad config value, malformed grid or CSV
  kExitIo = 4,          // missing or unwritable file
  kExitModel = 5,       // bundle/dataset version, shape or invariant violation
  kExitUndefined = 6,   // result not defined for these inputs
};

/// Runs one command line (without argv[0]). Regular output goes to `out`
/// unless --output names a file; diagnostics go to `err`, errors as a single
/// `error code=... exit=... message="..."` line.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ehspc::cli
