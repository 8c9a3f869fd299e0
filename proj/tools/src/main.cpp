#include <iostream>
#include <string>
#include <vector>

#include "cltrace/app.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cltrace::run(args, std::cout, std::cerr);
}
