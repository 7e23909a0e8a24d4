#include <iostream>

#include "photonforge/cli.hpp"

int main(int argc, char** argv) {
  return photonforge::cli::run_main(argc, argv, std::cout, std::cerr);
}
