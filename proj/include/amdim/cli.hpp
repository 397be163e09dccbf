#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace amdim::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitToleranceFailure = 1;
inline constexpr int kExitUsage = 2;

/// Runs one invocation; `args` excludes the program name. Files go under
/// --out, progress and diagnostics to `out`/`err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace amdim::cli
