#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace cqarank::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitData = 2,
  kExitStale = 3,
};

/// Runs one cqarank command. `args` excludes the program name. Normal output
/// goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Settings file written by `synth-bench` for the lexical-gap benchmark.
std::string synthetic_benchmark_config(std::uint64_t seed);

}  // namespace cqarank::cli
