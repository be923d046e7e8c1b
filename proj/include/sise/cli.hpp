#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace sise::cli {

/// 0 success, 2 usage or input errors, 3 fitting failures.
enum ExitCode : int { kOk = 0, kUsage = 2, kFitFailure = 3 };

struct CommandResult {
  int exit_code = kOk;
  std::vector<std::string> artifacts;
  std::string summary;
};

struct FitArgs {
  std::string input;
  std::string output_dir = ".";
  std::string penalty = "ne";
  double delta_t = 0.01;
  std::optional<double> max_bandwidth;
  std::optional<double> frame_left;
  std::optional<double> frame_right;
  std::uint64_t seed = 0;
  int global_budget = 100;
};

struct SimulateArgs {
  std::string config;
  std::string preset;
  std::string input;   // split preset
  std::string onsets;  // split preset
  int splits = 100;
  std::optional<int> replicates;
  std::optional<std::uint64_t> seed;
  std::string output_dir = ".";
  int threads = 0;
};

struct ImputeArgs {
  std::string fit;
  std::string input;
  std::string output = "imputed.csv";
};

struct BootstrapArgs {
  FitArgs fit;
  int replicates = 200;
  bool reuse_bandwidth = false;
  int threads = 0;
};

CommandResult cmd_fit(const FitArgs& args);
CommandResult cmd_simulate(const SimulateArgs& args);
CommandResult cmd_impute(const ImputeArgs& args);
CommandResult cmd_bootstrap(const BootstrapArgs& args);

/// Parses argv, dispatches, prints the summary or error; returns the exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sise::cli
