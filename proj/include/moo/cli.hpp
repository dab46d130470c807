#pragma once

namespace moo {

/// Entry point for the `mooc` command-line tool. Returns the process exit
/// code: 0 success, 1 parse/check/configuration error, 2 program runtime
/// error, 3 transport failure, 4 equivalence mismatch.
int cli_main(int argc, char** argv);

inline constexpr int kExitOk = 0;
inline constexpr int kExitFrontEnd = 1;
inline constexpr int kExitRuntime = 2;
inline constexpr int kExitTransport = 3;
inline constexpr int kExitMismatch = 4;

}  // namespace moo
