#pragma once

#include <iosfwd>

namespace gesture_forge {

/// Exit codes: 0 success, 1 usage error, 2 data or model error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Runs one subcommand. Results go to `out` unless --out names a file;
/// diagnostics and usage go to `err`. GESTURE_FORGE_SEED, when set,
/// overrides every --seed.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gesture_forge
