#include <iostream>
#include <string>
#include <vector>

#include "drlqg_tools/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return drlqg::cli::run(args, std::cout, std::cerr);
}
