#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace astcost::cli {

enum ExitCode : int {
  kOk = 0,
  kUsageError = 1,
  kDataError = 2,
  kDivergence = 3,
};

/// Runs one subcommand (synth, featurize, train, sweep, evaluate, predict,
/// report). The first line written to `out` is the resolved configuration as
/// JSON. Returns an ExitCode.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace astcost::cli
