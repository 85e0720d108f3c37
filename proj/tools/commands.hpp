#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace arousal::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUnscorable = 2;
inline constexpr int kExitUsage = 64;

/// Runs the tool with argv[1..] in `args`. Reports go to `out`, diagnostics
/// to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace arousal::cli
