#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace weirflow::cli {

/// Runs one command line (without the program name). Returns the process exit
/// code: 0 success, 1 some models failed, 2 usage or validation error.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace weirflow::cli
