#pragma once

#include <ostream>

namespace almostcomm::cli {

enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kInputError = 2,
  kTheoremViolation = 3,
  kDecompositionFailure = 4,
};

/// Entry point shared by the executable and the tests.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace almostcomm::cli
