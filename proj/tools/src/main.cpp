#include <string>
#include <vector>

#include "lagcast_cli/cli.hpp"

int main(int argc, char** argv) {
  return lagcast::cli::run_command(std::vector<std::string>(argv, argv + argc));
}
