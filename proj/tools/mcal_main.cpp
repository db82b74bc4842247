#include <iostream>

#include "mcal/cli.hpp"

int main(int argc, char** argv) {
  return mcal::cli::run_cli(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
