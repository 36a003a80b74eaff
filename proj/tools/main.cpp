#include <iostream>
#include <locale>
#include <string>
#include <vector>

#include "cli.hpp"

int main(int argc, char** argv) {
  std::cout.imbue(std::locale::classic());
  std::vector<std::string> args(argv, argv + argc);
  return emd::cli::run(args, std::cout, std::cerr);
}
