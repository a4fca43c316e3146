#pragma once

#include <iosfwd>

namespace l96::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kBadArgs = 2, kDivergence = 3, kNoCycle = 4 };

// Entry point of the `l96` tool. Normal output goes to `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace l96::cli
