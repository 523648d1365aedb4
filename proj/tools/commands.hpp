#pragma once

#include "chiralmag/config.hpp"

#include <array>
#include <optional>
#include <string>

namespace chiralmag::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 1,
  kLineSearchStalled = 2,
  kAdmissibility = 3,
  kStepFailed = 4,
};

struct Options {
  std::string config;
  std::string out = ".";
  std::optional<unsigned long long> seed;
  int threads = 0;
  std::string suite = "all";
  std::array<double, 3> point{0.0, 0.0, 0.0};
};

int cmd_minimize(const Options& o);
int cmd_evolve(const Options& o);
int cmd_check(const Options& o);
int cmd_degree(const Options& o);

/// Runs the named invariant suite and prints a pass/fail table. Returns false
/// if any row fails; throws ConfigError for an unknown suite.
bool run_suite(const std::string& name, const RunConfig& config);

} // namespace chiralmag::cli
