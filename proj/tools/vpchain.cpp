// Command-line runner for the vp-tree and chain experiments.
//
//   vpchain <subcommand> --config <path> [--seed N] [--out DIR] [--replicas N]
//
// Prints a JSON run summary on stdout. Exit status: 0 when every check of the
// run passes, 1 when a check fails or the run aborts, 2 on a usage error.

#include <CLI11.hpp>
#include <iostream>

#include "vpchain/cli/commands.hpp"

namespace {

int usage_error(const std::string& message) {
  nlohmann::ordered_json j{{"error", "usage"}, {"message", message}};
  std::cerr << j.dump(2) << "\n";
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace vpchain;

  CLI::App app{"Vantage-point tree and left-boundary chain experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::uint64_t> replicas;
  for (auto name : cli::kCommands) {
    auto* sub = app.add_subcommand(std::string(name));
    sub->add_option("--config", config_path, "INI configuration file")->required();
    sub->add_option("--seed", seed, "master seed (overrides run.seed)");
    sub->add_option("--out", out, "output directory (overrides run.out)");
    sub->add_option("--replicas", replicas, "replica count (overrides run.replicas)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return usage_error(e.what());
  }

  try {
    auto config = cli::load_config(config_path);
    if (seed) config.seed = seed;
    if (out) config.out_dir = *out;
    if (replicas) config.replicas = replicas;
    const auto summary = cli::run_command(app.get_subcommands().front()->get_name(), config);
    std::cout << summary.to_json().dump(2) << "\n";
    return summary.passed() ? 0 : 1;
  } catch (const UsageError& e) {
    return usage_error(e.what());
  } catch (const std::exception& e) {
    nlohmann::ordered_json j{{"error", "run"}, {"message", e.what()}, {"passed", false}};
    std::cout << j.dump(2) << "\n";
    return 1;
  }
}
