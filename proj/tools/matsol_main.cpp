#include <iostream>

#include "matsol/cli.hpp"

int main(int argc, char** argv) {
  return matsol::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
