#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace actlearn {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Entry point of the `actlearn` tool. args[0] is the program name.
/// Returns 0 on success, 1 on a usage error, 2 on a data or validation
/// error. Data goes to files or `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace actlearn
