#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ctxfix::cli {

enum ExitCode : int { kOk = 0, kTaskFailure = 1, kUsage = 2 };

/// args[0] is the program name. The summary goes to `out` unless --summary is given.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace ctxfix::cli
