#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vpchain/chain.hpp"
#include "vpchain/geometry.hpp"

namespace vpchain::cli {

/// Everything an experiment needs. Loaded from an INI file, then overridden
/// by command-line flags. Field names in error messages use the
/// `section.key` form of the file.
struct ExperimentConfig {
  // [space]
  std::size_t dim = 2;
  NormKind norm = NormKind::L2;
  double tau = 4.0 / 7.0;
  // [body]
  BodySpec body{};
  // [run]
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> replicas;  // per-command default when unset
  std::filesystem::path out_dir = "out";
  // [chain-run]
  std::uint64_t steps = 20;
  bool force_origin = false;
  // [regen-stats]
  std::uint64_t blocks = 1000;
  std::uint64_t step_budget = 100'000'000;
  std::uint64_t volume_samples = 256;
  std::uint64_t reciprocal_repetitions = 8;
  // [lln]
  std::vector<std::uint64_t> lln_ns{1000, 10000, 100000, 1000000};
  double lln_rel_tol = 0.15;
  // [duality]
  std::uint64_t duality_n = 200;
  double alpha = 0.01;
  // [nn-bench]
  std::uint64_t nn_points = 10000;
  std::uint64_t nn_queries = 1000;
  // [height-ratio]
  std::vector<std::uint64_t> height_ns{100, 1000, 10000};
  // [theorem2]
  std::vector<double> xs{0.5, 1.0, 2.0};
  std::vector<int> ss{-1, 0, 1};
  int theorem2_n = 8;
  double tol = 1e-6;
  std::uint64_t warmup = 200;

  NormedSpace space() const { return NormedSpace(dim, norm); }
  /// The master seed; a usage error if none was given.
  std::uint64_t require_seed() const;
  std::uint64_t replicas_or(std::uint64_t fallback) const { return replicas.value_or(fallback); }

  /// Flattened `section.key = value` pairs describing every field.
  std::vector<std::pair<std::string, std::string>> entries() const;
};

ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Range checks shared by all commands; throws UsageError naming the field.
void validate(const ExperimentConfig& config);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double x);

}  // namespace vpchain::cli
