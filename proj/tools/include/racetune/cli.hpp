#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace racetune {

enum ExitCode : int { exit_ok = 0, exit_usage = 1, exit_failure = 2 };

/// Runs the command line `args` (without the program name).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace racetune
