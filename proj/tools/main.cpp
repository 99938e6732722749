#include "cli.hpp"

#include "dgpinn/runtime.hpp"

#include <iostream>

int main(int argc, char** argv) {
  dgpinn::tune_allocator();
  return dgpinn::cli::run(argc, argv, std::cout, std::cerr);
}
