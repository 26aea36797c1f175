#pragma once

#include <string>
#include <vector>

namespace cpt {

// Sysexits-style codes for the CLI front end; gate decisions use their own
// codes (0/10/20/30, +1 for backfire review).
inline constexpr int kExitUsage = 64;
inline constexpr int kExitInput = 65;
inline constexpr int kExitInternal = 70;

// Runs one CLI invocation. args excludes the program name.
int run_cli(const std::vector<std::string>& args);

} // namespace cpt
