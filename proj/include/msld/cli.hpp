#pragma once

#include <iosfwd>

namespace msld::cli {

enum ExitCode : int {
  kSuccess = 0,
  kValidation = 1,
  kIo = 2,
  kNumeric = 3,
};

/// Entry point of the `msld` tool: segment, eval, compare and bench subcommands.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace msld::cli
