#pragma once

// Command-line front end: list, describe, eval, verify.

#include <ostream>
#include <string>
#include <vector>

namespace ehrcov::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitVerificationFailed = 1;
inline constexpr int kExitUsage = 2;

/// Runs the command line `args` (args[0] is the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "0, 0, pi/2" or "(1,0,0,0)": comma-separated constant expressions; `pi` is bound.
std::vector<double> parse_point(const std::string& text);

}  // namespace ehrcov::cli
