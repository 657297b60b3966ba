#pragma once

#include <string>
#include <vector>

namespace ppcalc::app {

enum ExitCode : int {
  kExitOk = 0,
  kExitVerifyFailed = 1,
  kExitConfig = 2,
  kExitNumeric = 3,
  kExitIo = 4,
};

// args excludes the program name.
int run_cli(const std::vector<std::string>& args);
int run_cli(int argc, char** argv);

}  // namespace ppcalc::app
