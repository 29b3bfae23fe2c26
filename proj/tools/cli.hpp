#pragma once

#include <iosfwd>

namespace tcm::cli {

/// Exit codes besides CLI11's own parse-error codes.
enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kIoError = 3,
  kParameterError = 4,
  kFormatError = 5,
  kSchemaError = 6,
  kTrainingError = 7,
};

/// Runs the `tcm` command line. Normal output goes to `out`, warnings and
/// errors to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tcm::cli
