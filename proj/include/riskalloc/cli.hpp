#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace riskalloc::cli {

/// Exit codes shared by every subcommand.
inline constexpr int exit_ok = 0;
inline constexpr int exit_check_failed = 1;
inline constexpr int exit_parse_error = 2;
inline constexpr int exit_domain_error = 3;

/// Run the tool on pre-split arguments (excluding the program name), writing
/// results to `out` and diagnostics to `err`.  Returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// argv entry point.
int run(int argc, const char* const* argv);

}  // namespace riskalloc::cli
