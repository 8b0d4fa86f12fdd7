#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace trendlab::cli {

/// Runs the command line `args` (without the program name). Returns the process
/// exit code: 0 on success, 2 on a usage error, 1 on a runtime error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace trendlab::cli
