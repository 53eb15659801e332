#pragma once

// Command-line front end. run_cli is the whole program minus process setup,
// so tests can drive it with captured streams.
//
// Exit codes:
//   0  success (experiment: every acceptance threshold passed)
//   1  experiment ran but some threshold failed
//   2  usage, schema or dimension error in the inputs
//   3  rank-deficient snapshot data
//   4  any other runtime failure

#include <iosfwd>
#include <string>
#include <vector>

namespace exopinf::cli {

enum ExitCode : int {
  kOk = 0,
  kThresholdFailure = 1,
  kUsageError = 2,
  kRankDeficient = 3,
  kRuntimeError = 4,
};

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// --threads beats EXACTOPINF_THREADS; 0 means all hardware threads.
unsigned resolve_threads(int flag_value, const char* env_value);

}  // namespace exopinf::cli
