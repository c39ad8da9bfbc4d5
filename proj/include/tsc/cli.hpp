#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tsc::cli {

/// Exit codes: 0 success, 1 usage or I/O error, 2 invalid data.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// `args[0]` is the program name. Writes results to `out` and diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tsc::cli
