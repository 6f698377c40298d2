#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace optotherm::cli {

enum ExitCode : int {
    kOk = 0,
    kInternalError = 1,
    kConfigError = 2,
    kPrecisionError = 3,
    kCutoffError = 4,
};

/// Runs one subcommand. args excludes the program name. CSV goes to --out
/// when given, otherwise to out; diagnostics go to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace optotherm::cli
