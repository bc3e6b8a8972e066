#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mcmot::cli {

/// Exit codes shared by every subcommand.
enum ExitCode : int {
    kOk = 0,
    kConfigError = 1,
    kIoError = 2,
    kInternalError = 3,
};

/// Runs the command line `args` (args[0] is the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mcmot::cli
