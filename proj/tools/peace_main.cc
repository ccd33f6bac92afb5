#include <iostream>
#include <string>
#include <vector>

#include "peace/cli.h"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return peace::run_cli(args, std::cout, std::cerr);
}
