#pragma once

#include <iosfwd>

namespace crossplit::cli {

enum ExitStatus : int { kOk = 0, kComputationFailure = 1, kUsageError = 2 };

/// Parses argv, runs one subcommand and writes its report to `out`
/// (diagnostics to `err`).  Never throws.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace crossplit::cli
