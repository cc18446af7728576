#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace privshard::cli {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitNothingFound = 1;  // query only
inline constexpr int kExitUsage = 2;         // usage, config, authorization

// Environment fallback for --keys.
inline constexpr const char* kKeysEnv = "PRIVSHARD_KEYS";

// Entry point shared by the binary and the tests. `args` excludes argv[0].
int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace privshard::cli
