#pragma once

#include <ostream>

namespace nbr::cli {

// Runs the command line and returns the process exit code: 0 on success,
// 1 for usage or configuration errors, 2 for data errors.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace nbr::cli
