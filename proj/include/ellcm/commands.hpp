#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ellcm {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitCheckFailed = 2, kExitNumerical = 3 };

/// One CLI invocation; `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ellcm
