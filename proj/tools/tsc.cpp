#include <iostream>
#include <string>
#include <vector>

#include "tsc/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return tsc::cli::run(args, std::cout, std::cerr);
}
