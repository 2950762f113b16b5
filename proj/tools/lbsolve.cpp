#include <string>
#include <vector>

#include "lbsolve/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return lbs::run_cli(args);
}
