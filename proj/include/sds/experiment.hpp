#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sds/config.hpp"

namespace sds {

inline constexpr const char* kVersion = "0.1.0";

/// Environment variable naming the default output root.
inline constexpr const char* kOutputRootEnv = "SDS_OUTPUT_ROOT";

struct RunOptions {
  unsigned workers = 1;
  std::string out_dir;  ///< overrides the config's output_dir when non-empty
};

struct RunResult {
  std::string output_dir;
  std::vector<std::string> files;  ///< written files, relative to output_dir
  std::string report_json;
};

/// --out, then config output_dir, then $SDS_OUTPUT_ROOT/<stem>, then
/// ./sds_output/<stem>, where <stem> is the config file name without extension.
std::string resolve_output_dir(const ExperimentConfig& config, const std::string& cli_out);

/// Runs the experiment and writes manifest.json, report.json and the data
/// files.  Data files and the report do not depend on the worker count.
/// Throws ConfigError, IdentityViolation or other errors from the modules.
RunResult run_experiment(const ExperimentConfig& config, const RunOptions& options);

/// 0 success, 2 configuration error, 3 violated identity, 1 anything else.
int exit_code_for(const std::exception& e) noexcept;

}  // namespace sds
