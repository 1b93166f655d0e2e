#include <iostream>
#include <string>
#include <vector>

#include "conecert/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return conecert::cli::run(std::move(args), std::cout, std::cerr);
}
