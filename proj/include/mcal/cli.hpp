#pragma once

// Command-line front end. Subcommands: gen-data, run, sweep-delta, fit-curve.

#include <iosfwd>
#include <string>
#include <vector>

namespace mcal::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kIo = 3,
  kInfeasibleDataset = 4,
  kNumeric = 5,
};

/// `args` holds the full argv, program name included. Output goes to the
/// given streams so the commands can run in-process.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "1%,2%" or "0.01,0.02" to fractions in (0, 1]. Throws ConfigError on an
/// empty list or a malformed entry.
std::vector<double> parse_delta_list(const std::string& text);

}  // namespace mcal::cli
