#include <string>
#include <vector>

#include "nlss/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return nlss::cli_main(args);
}
