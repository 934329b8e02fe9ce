#pragma once

#include <ostream>

namespace multibin::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kRuntimeError = 1;
inline constexpr int kUsageError = 2;

/// Full command line entry point; writes reports to `out` (unless --out is
/// given) and diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace multibin::cli
