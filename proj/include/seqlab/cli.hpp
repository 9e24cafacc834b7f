#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace seqlab {

// Exit statuses of the command-line front end.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitData = 2,
  kExitNumeric = 3,
};

// Runs one command line (args excludes the program name). Normal output goes
// to `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace seqlab
