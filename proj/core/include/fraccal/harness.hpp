#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "fraccal/config.hpp"

namespace fraccal {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitSolver = 3;
inline constexpr int kExitInvariant = 4;

struct RunOptions {
  std::string out_dir;  // overrides run.out
  std::optional<int> threads;
  std::optional<std::uint64_t> seed;
};

struct RunResult {
  int exit_code = kExitOk;
  std::string status;  // pass | fail | error
  std::string message;
  std::string report_path;
  std::string payload_hash;
};

std::string library_version();

// Executes the selected suite and writes <out>/report.json and <out>/timing.json.
// Config errors detected before any computation produce no report.
RunResult run(ExperimentConfig cfg, const RunOptions& opt);
RunResult run_file(const std::string& config_path, const RunOptions& opt);

// maps an in-flight exception to an exit code
int exit_code_for(const std::exception& e);

}  // namespace fraccal
