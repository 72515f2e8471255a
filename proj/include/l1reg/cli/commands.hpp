#pragma once

// Batch commands behind the l1reg executable. Each command parses its config,
// writes CSV outputs plus the echoed config.json into the output directory and
// returns a process exit code.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "l1reg/cli/config.hpp"

namespace l1reg::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitValidation = 2,
  kExitNonConvergence = 3,
  kExitSdpFailure = 4,
};

struct RunOptions {
  std::filesystem::path out_dir = ".";
  std::optional<std::size_t> jobs;
  /// Replaces the seed of the config (data seed, master seed or sampling seed).
  std::optional<std::uint64_t> seed;
  std::ostream* out = nullptr;  // summary lines; null discards them
  std::ostream* err = nullptr;  // error messages; null discards them
};

inline const std::vector<std::string>& analysis_names() {
  static const std::vector<std::string> names{"phi", "witness", "conditioning", "weakstar", "vsc", "gamma"};
  return names;
}

int cmd_solve(const json& config, const RunOptions& options);
int cmd_rates(const json& config, const RunOptions& options);
int cmd_analyze(const std::string& analysis, const json& config, const RunOptions& options);

/// Full command line front end; returns the exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace l1reg::cli
