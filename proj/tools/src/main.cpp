#include <iostream>

#include "refsearch/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return refsearch::run_cli(args, std::cout, std::cerr);
}
