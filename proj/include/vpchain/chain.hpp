#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "vpchain/geometry.hpp"
#include "vpchain/rng.hpp"

namespace vpchain {

/// Shape of the initial body K.
struct BodySpec {
  enum class Kind { UnitBall, Cube };
  Kind kind = Kind::UnitBall;
  double half_width = 1.0;  // Cube only

  BallIntersection make(const NormedSpace& space) const;
  double volume(const NormedSpace& space) const;
};

/// Checks tau in (0, 1); throws UsageError naming the field otherwise.
void check_tau(double tau);

/// One value of the normalized left-boundary chain plus regeneration
/// bookkeeping. Visits to B_1 count as regenerations, including step 0.
struct ChainState {
  BallIntersection body;
  std::uint64_t step = 0;
  double tau = 0.5;
  std::uint64_t regen_count = 0;
  std::optional<std::uint64_t> last_regen_step;
};

ChainState initial_state(const NormedSpace& space, double tau, const BodySpec& body = {});

/// True iff the pruned representation is exactly {B_1(0)}. Exact: if the set
/// equals B_1 then every other ball contains B_1(0) and is pruned.
bool is_unit_ball(const BallIntersection& body);

struct Transition {
  ChainState next;
  Point u;
};

/// X -> tau^{-1}(X - u) ∩ B_1 with u uniform on X.
Transition chain_transition(const ChainState& state, Rng& rng);
ChainState chain_step(const ChainState& state, Rng& rng);
/// Same map with a caller-chosen u (which should lie in the body).
ChainState chain_step(const ChainState& state, const Point& u);

/// Exponents k with radius = tau^{-k}, in list order; nullopt if some radius
/// is not such a power within `tol` (measured on the exponent).
std::optional<std::vector<int>> radius_exponents(const BallIntersection& body, double tau, double tol = 1e-9);

/// Stationary functionals recorded per regeneration block.
enum class Functional {
  One,
  UnitBallIndicator,
  Volume,
  ReciprocalVolume,
  InscribedRadius,
  BallCount,
};

std::string_view to_string(Functional f);
inline constexpr Functional kAllFunctionals[] = {Functional::One,          Functional::UnitBallIndicator,
                                                 Functional::Volume,       Functional::ReciprocalVolume,
                                                 Functional::InscribedRadius, Functional::BallCount};

struct RegenStats {
  /// kappa^(i) - kappa^(i-1), one per completed block.
  std::vector<std::uint64_t> return_times;
  /// Per-functional list of per-block sums over kappa^(i-1) <= h < kappa^(i).
  std::map<Functional, std::vector<double>> block_sums;
  /// Pairwise-pruned constraint count of every state in a completed block.
  std::map<std::size_t, std::uint64_t> ball_count_histogram;
  double min_inscribed_radius = 0.0;  // NaN unless InscribedRadius is recorded
  std::uint64_t total_steps = 0;

  std::size_t blocks() const { return return_times.size(); }
};

class StepBudgetExceeded : public std::runtime_error {
 public:
  StepBudgetExceeded(const std::string& what, RegenStats partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const RegenStats& partial() const { return partial_; }

 private:
  RegenStats partial_;
};

struct RegenOptions {
  std::uint64_t n_blocks = 1000;
  std::uint64_t step_budget = 100'000'000;
  std::vector<Functional> functionals{std::begin(kAllFunctionals), std::end(kAllFunctionals)};
  std::uint64_t volume_samples = 256;
  std::uint64_t reciprocal_repetitions = 8;
  InscribedOptions inscribed{};
  /// Called on every state of every completed or partial block.
  std::function<void(const ChainState&)> observer;
};

/// Runs the chain from B_1 until n_blocks returns to B_1. Throws
/// StepBudgetExceeded (carrying partial stats) if the budget runs out.
RegenStats run_regenerations(const NormedSpace& space, double tau, Rng& rng, const RegenOptions& options = {});

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// Ratio estimator E[block sum] / E[block length] with a delta-method
/// standard error over i.i.d. blocks. Needs at least two blocks.
Estimate stationary_estimate(const RegenStats& stats, Functional f);

}  // namespace vpchain
