#pragma once

#include <filesystem>
#include <json.hpp>
#include <string>
#include <string_view>
#include <vector>

#include "vpchain/cli/config.hpp"

namespace vpchain::cli {

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct RunSummary {
  std::string experiment;
  std::uint64_t seed = 0;
  double wall_time_s = 0.0;
  std::vector<std::filesystem::path> outputs;
  nlohmann::ordered_json headline = nlohmann::ordered_json::object();
  std::vector<Check> checks;

  bool passed() const;
  nlohmann::ordered_json to_json() const;
};

RunSummary cmd_chain_run(const ExperimentConfig& config);
RunSummary cmd_regen_stats(const ExperimentConfig& config);
RunSummary cmd_lln(const ExperimentConfig& config);
RunSummary cmd_duality(const ExperimentConfig& config);
RunSummary cmd_nn_bench(const ExperimentConfig& config);
RunSummary cmd_height_ratio(const ExperimentConfig& config);
RunSummary cmd_theorem2(const ExperimentConfig& config);

inline constexpr std::string_view kCommands[] = {"chain-run", "regen-stats", "lln",     "duality",
                                                 "nn-bench",  "height-ratio", "theorem2"};

/// Validates the config, creates the output directory and dispatches.
RunSummary run_command(std::string_view name, const ExperimentConfig& config);

}  // namespace vpchain::cli
