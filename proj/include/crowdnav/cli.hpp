#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace crowdnav {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitConfig = 2;

/// Entry point of the `crowdnav` tool; `args` excludes the program name.
/// Errors go to `err` only.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace crowdnav
