#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace logsym::cli {

/// Runs one subcommand (fit, simulate, mc, diagnose, theory). `args` excludes
/// the program name. Failures are reported on `err` as a single JSON line
/// {"error": kind, "message": text} and a nonzero exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace logsym::cli
