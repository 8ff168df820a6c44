#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace coaldetect {

inline constexpr int kExitUsage = 64;
inline constexpr int kExitDomain = 65;
inline constexpr int kExitPartial = 2;

/// Parses argv (without the program name) and runs one subcommand. Results
/// go to `out`, diagnostics to `err`.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace coaldetect
