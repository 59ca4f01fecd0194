#include <iostream>
#include <string>
#include <vector>

#include "wsseg/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return wsseg::cli::run(args, std::cout, std::cerr);
}
