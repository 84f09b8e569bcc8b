#include <iostream>
#include <string>
#include <vector>

#include "rbac/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return rbac::cli::dispatch(args, std::cout, std::cerr);
}
