#include <iostream>
#include <string>
#include <vector>

#include "kssd/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return kssd::cli::run(args, std::cout, std::cerr);
}
