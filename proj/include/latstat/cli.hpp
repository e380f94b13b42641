#pragma once

// Command-line front end: argument parsing, config validation, experiment
// dispatch and artifact emission.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "latstat/experiments.hpp"

namespace latstat::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitResource = 3;

struct ConfigResult {
  std::optional<experiments::ExperimentConfig> config;
  std::vector<std::string> errors;
};

// Reads and checks a JSON config, reporting every problem found.
ConfigResult validate_config(const std::filesystem::path& path);

// argv[0] is the program name. Returns the process exit code.
int dispatch(const std::vector<std::string>& argv);
int dispatch(int argc, char** argv);

}  // namespace latstat::cli
