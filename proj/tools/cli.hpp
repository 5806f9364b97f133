#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace factcheck::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitEvaluationFailed = 1;
inline constexpr int kExitUsage = 2;

/// Runs the `factcheck` command line. `args` excludes the program name.
/// Reports go to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace factcheck::cli
