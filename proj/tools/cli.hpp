#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace wmlab::cli {

/// Run one command line (without the program name). Returns the exit code:
/// 0 success, 2 validation error, 3 non-convergence, 4 I/O error,
/// 1 anything else including a replay whose outputs differ.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace wmlab::cli
