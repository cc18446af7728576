#include <iostream>
#include <string>
#include <vector>

#include "privshard/cli.h"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return privshard::cli::Run(args, std::cout, std::cerr);
}
