#ifndef LMX_CLI_HPP
#define LMX_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

namespace lmx::cli {

// Dispatch a full command line (argv without the program name).
// Exit codes: 0 success, 1 user error, 2 numerical failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lmx::cli

#endif
