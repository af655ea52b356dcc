#include <iostream>

#include "gfmswing/builtin_scenarios.hpp"
#include "gfmswing/cli/commands.hpp"

int main(int argc, char** argv) {
  return gfmswing::cli::main_entry(argc, argv, gfmswing::builtin_scenarios(), std::cout, std::cerr);
}
