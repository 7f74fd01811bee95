#include <iostream>
#include <string>
#include <vector>

#include "nimfa/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return nimfa::cli::run(args, std::cout, std::cerr);
}
