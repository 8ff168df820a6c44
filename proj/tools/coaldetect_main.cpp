#include <iostream>
#include <string>
#include <vector>

#include "coaldetect/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return coaldetect::dispatch(args, std::cout, std::cerr);
}
