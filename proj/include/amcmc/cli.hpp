#pragma once

#include <iosfwd>

namespace amcmc {

/// Process exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 2,
  kExitParse = 3,
  kExitRuntime = 4,
};

/// Entry point of the `amcmc` tool with injectable streams. Subcommands:
/// run, exact, genbench, qdump (see docs/grammar.md for formats).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace amcmc
