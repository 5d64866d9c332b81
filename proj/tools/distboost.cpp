#include <iostream>
#include <string>
#include <vector>

#include "distboost/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return distboost::cli::run(args, std::cout, std::cerr);
}
