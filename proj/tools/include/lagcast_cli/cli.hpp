#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lagcast::cli {

// Runs one subcommand (argv[0] is the program name). Returns 0 on success,
// 1 on a validation error, 2 on a numerical failure; messages go to `err`.
int run_command(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);
int run_command(const std::vector<std::string>& argv);

}  // namespace lagcast::cli
