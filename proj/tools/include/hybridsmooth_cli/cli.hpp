#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hs::cli {

enum ExitCode : int { kSuccess = 0, kInputError = 1, kNoConvergence = 2 };

/// Runs the command line `args` (without the program name). Reports go to
/// files; progress and summaries to `out`, errors to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hs::cli
