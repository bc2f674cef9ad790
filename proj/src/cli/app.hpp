#pragma once

#include <string>
#include <vector>

namespace qsl::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitDataError = 3;
inline constexpr int kExitRuntimeError = 4;

// Full command-line entry point (gen / run / bench / verify-estimator).
// Returns a process exit code; never throws.
int run_app(int argc, const char* const* argv);

// Convenience overload for in-process invocation: args exclude argv[0].
int run_app(const std::vector<std::string>& args);

}  // namespace qsl::cli
