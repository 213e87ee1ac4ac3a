#pragma once

#include <iosfwd>

namespace mcid::harness {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitConfig = 2, kExitNumerical = 3 };

// Full command-line front end. Diagnostics go to `err`, progress to `out`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mcid::harness
