#include <iostream>
#include <string>
#include <vector>

#include "herding/cli.hpp"

int main(int argc, char** argv) {
  return herding::cli::main(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
