#pragma once

// Command-line front end: verify, simulate, curvature, sweep, transform.
// Exit codes: 0 success, 1 check failure, 2 config error, 3 runtime abort.

#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

namespace curvlab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

/// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Fully populated configuration with every key at its default.
nlohmann::json default_config();

}  // namespace curvlab::cli
