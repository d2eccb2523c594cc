#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace anonsim::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kDataError = 3 };

// Runs one command line (without the program name). Output files go where the
// flags say, or under $ANONSIM_OUT_DIR when set.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace anonsim::cli
