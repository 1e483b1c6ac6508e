#pragma once

#include <ostream>

namespace tumorseg::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCompute = 1;
inline constexpr int kExitUsage = 2;

/// Parses the command line and runs one subcommand. Results go to `out`,
/// diagnostics to `err`. Returns 0 on success, 1 on a computation error and
/// 2 on a usage or input error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tumorseg::cli
