#include <iostream>
#include <string>
#include <vector>

#include "dirikit/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return dirikit::cli::run(args, std::cout, std::cerr);
}
