#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fsi::cli {

/// Runs the command line `args` (without the program name). Returns the exit
/// code: 0 success, 1 input or configuration error, 2 numerical failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fsi::cli
