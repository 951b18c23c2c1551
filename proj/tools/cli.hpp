#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gdspin::cli {

enum ExitCode : int {
    kSuccess = 0,
    kUsageError = 2, ///< bad flags or unreadable instance
    kNumericalAbort = 3,
};

/// Runs the gdspin command line with args (without the program name),
/// writing the human-readable report to out and diagnostics to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace gdspin::cli
