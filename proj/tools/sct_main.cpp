#include <iostream>
#include <string>
#include <vector>

#include <sct/cli.hpp>

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return sct::sct_main(args, std::cout, std::cerr);
}
