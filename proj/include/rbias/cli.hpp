#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace rbias::cli {

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int {
  kSuccess = 0,
  kUsageError = 2,
  kNumericalFailure = 3,
};

// Runs one command line (without the program name), e.g.
// {"estimate", "--model", "m.json", ...}. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rbias::cli
