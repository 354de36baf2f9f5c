#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vpchain/chain.hpp"
#include "vpchain/cli/config.hpp"

namespace vpchain::cli {

/// CSV file whose first lines are `#` comments holding the command, the seed
/// and every configuration entry, followed by the column header.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::string_view command, const ExperimentConfig& config,
            const std::vector<std::string>& columns);

  void row(const std::vector<std::string>& cells);
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::size_t width_;
};

std::string cell(double x);
std::string cell(std::uint64_t x);
std::string cell(std::int64_t x);
inline std::string cell(int x) { return cell(static_cast<std::int64_t>(x)); }
inline std::string cell(bool x) { return x ? "true" : "false"; }

/// One trajectory step: the state and the point u that produced it (none at
/// step 0).
struct TrajectoryStep {
  ChainState state;
  std::optional<Point> u;
};

/// Line-delimited JSON, one record per step with fields in the order
/// step, u, balls, box, regen.
std::string trajectory_jsonl(const std::vector<TrajectoryStep>& steps);

/// Grid of panels, one per step, each showing the state as the intersection
/// of its balls (nested clip paths) with ball outlines drawn in the norm's
/// shape. Panels of steps that visit B_1 are framed. The next point u drawn
/// from a state is marked in its panel. Output bytes depend only on input.
std::string trajectory_svg(const std::vector<TrajectoryStep>& steps);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace vpchain::cli
