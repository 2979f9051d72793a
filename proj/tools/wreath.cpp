#include <iostream>
#include <string>
#include <vector>

#include "wreath/experiment.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return wreath::run(args, std::cout, std::cerr);
}
