#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rabm {

/// Runs the command line `args` (without the program name). Returns the exit code;
/// normal output goes to `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rabm
