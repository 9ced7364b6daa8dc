#pragma once

namespace coexist::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitDeadline = 4;

/// Entry point of the `coexist` tool. Returns the process exit code.
int run_cli(int argc, char** argv);

}  // namespace coexist::cli
