#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace turbsynth::cli {

/// Runs the command line (args excludes the program name). Returns the
/// process exit code: 0 success, 1 error, 2 partial dataset, 3 statistics
/// outside tolerance.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace turbsynth::cli
