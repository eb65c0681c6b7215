#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace synthscreen::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
/// Some configurations failed; the successful rows were still written.
inline constexpr int kExitPartial = 2;

/// Parses `args` (without the program name) and runs one subcommand.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace synthscreen::cli
