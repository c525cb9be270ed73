#pragma once

namespace flatlab {

inline constexpr const char* FLATLAB_VERSION = "0.1.0";

// Full command-line entry point: parses argv, dispatches run/sweep/compare.
// Exit codes: 0 success, 2 configuration or usage error, 3 numeric failure.
int run_cli(int argc, const char* const* argv);

}  // namespace flatlab
