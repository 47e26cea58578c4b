#pragma once

#include "riskmdp/report.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace riskmdp::cli {

enum ExitCode : int { kOk = 0, kNotConverged = 1, kInputError = 2 };

struct CommandResult {
    int exit_code = kOk;
    RunReport report;
};

/// Runs one `riskmdp` invocation. args excludes the program name. The report is
/// written to --out when given, otherwise rendered on `out`; diagnostics go to `err`.
CommandResult run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace riskmdp::cli
