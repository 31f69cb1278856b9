#include <iostream>

#include "ellcm/commands.hpp"

int main(int argc, char** argv) {
  return ellcm::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
