#pragma once

// Command-line front end. cli_main is the whole program minus argv
// marshalling so tests can drive every subcommand in-process.

#include <string>
#include <vector>

namespace nlss {

int cli_main(const std::vector<std::string>& args);

}  // namespace nlss
