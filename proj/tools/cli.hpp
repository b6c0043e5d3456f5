#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lact::cli {

enum ExitCode : int { ok = 0, failure = 1, usage = 2, numerical = 3 };

/// Runs one command line (args[0] is the program name) and returns its exit
/// code. Diagnostics go to err, progress and summaries to out.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lact::cli
