#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qpflow::cli {

enum ExitCode : int {
  kSuccess = 0,
  kVerificationFailure = 1,
  kInputError = 2,
  kNumericalFailure = 3,
};

struct RunConfig {
  std::string command;
  std::string system_path;
  double t_end = 0.0;
  double tol = 1e-10;
  int order = 20;
  std::string out_path;
  std::string format = "csv";
  bool square = false;
  int N = 1;
  int k = 1;
  int i = 1;  // 1-based, as printed
};

// Validates cfg and dispatches. Data goes to --out (atomically) or to `out`;
// diagnostics go to `err`. Errors are reported as a single line
// "error[<Code>]: <message>".
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

// argv-style entry point used by main and the CLI tests.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qpflow::cli
