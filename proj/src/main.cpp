#include <iostream>

#include "fidkit/cli.hpp"

int main(int argc, char** argv) {
  return fidkit::cli::run(argc, argv, std::cout, std::cerr);
}
