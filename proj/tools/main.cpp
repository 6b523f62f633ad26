#include <iostream>

#include "powalloc/cli_app.hpp"

int main(int argc, char** argv) {
  return powalloc::run_cli(argc, argv, std::cout, std::cerr);
}
