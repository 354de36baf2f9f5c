#include "vpchain/chain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vpchain/stats.hpp"

namespace vpchain {

BallIntersection BodySpec::make(const NormedSpace& space) const {
  if (kind == Kind::Cube) return BallIntersection::cube(space, half_width);
  return BallIntersection::unit_ball(space);
}

double BodySpec::volume(const NormedSpace& space) const {
  if (kind == Kind::Cube) return std::pow(2.0 * half_width, static_cast<double>(space.dim()));
  return space.unit_ball_volume();
}

void check_tau(double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw UsageError("tau: must lie in (0, 1)");
}

ChainState initial_state(const NormedSpace& space, double tau, const BodySpec& body) {
  check_tau(tau);
  ChainState s{prune(body.make(space)), 0, tau, 0, std::nullopt};
  if (is_unit_ball(s.body)) {
    s.regen_count = 1;
    s.last_regen_step = 0;
  }
  return s;
}

bool is_unit_ball(const BallIntersection& body) {
  const auto pruned = prune(body);
  if (pruned.box() || pruned.balls().size() != 1) return false;
  const Ball& b = pruned.balls().front();
  return std::abs(b.radius - 1.0) <= kContainmentTol && body.space().norm(b.center) <= kContainmentTol;
}

ChainState chain_step(const ChainState& state, const Point& u) {
  const auto& space = state.body.space();
  ChainState next{prune(state.body.transformed(u, state.tau).with_ball(Ball{Point::zero(space.dim()), 1.0})),
                  state.step + 1, state.tau, state.regen_count, state.last_regen_step};
  if (is_unit_ball(next.body)) {
    ++next.regen_count;
    next.last_regen_step = next.step;
  }
  return next;
}

Transition chain_transition(const ChainState& state, Rng& rng) {
  Point u = sample_uniform(state.body, rng);
  return {chain_step(state, u), u};
}

ChainState chain_step(const ChainState& state, Rng& rng) { return chain_transition(state, rng).next; }

std::optional<std::vector<int>> radius_exponents(const BallIntersection& body, double tau, double tol) {
  std::vector<int> out;
  const double log_inv_tau = -std::log(tau);
  for (const auto& b : body.balls()) {
    if (!(b.radius > 0)) return std::nullopt;
    const double k = std::log(b.radius) / log_inv_tau;
    const double rounded = std::round(k);
    if (std::abs(k - rounded) > tol || rounded < 0) return std::nullopt;
    out.push_back(static_cast<int>(rounded));
  }
  return out;
}

std::string_view to_string(Functional f) {
  switch (f) {
    case Functional::One: return "one";
    case Functional::UnitBallIndicator: return "unit_ball_indicator";
    case Functional::Volume: return "volume";
    case Functional::ReciprocalVolume: return "reciprocal_volume";
    case Functional::InscribedRadius: return "inscribed_radius";
    case Functional::BallCount: return "ball_count";
  }
  return "?";
}

RegenStats run_regenerations(const NormedSpace& space, double tau, Rng& rng, const RegenOptions& options) {
  check_tau(tau);
  if (options.n_blocks < 1) throw UsageError("n_blocks: must be >= 1");

  RegenStats stats;
  const bool track_radius =
      std::find(options.functionals.begin(), options.functionals.end(), Functional::InscribedRadius) !=
      options.functionals.end();
  stats.min_inscribed_radius = track_radius ? std::numeric_limits<double>::infinity()
                                            : std::numeric_limits<double>::quiet_NaN();
  for (Functional f : options.functionals) stats.block_sums[f];

  std::map<Functional, double> current;
  std::vector<std::size_t> current_counts;
  auto evaluate = [&](const ChainState& s, Functional f) -> double {
    switch (f) {
      case Functional::One: return 1.0;
      case Functional::UnitBallIndicator: return is_unit_ball(s.body) ? 1.0 : 0.0;
      case Functional::Volume: return volume_estimate(s.body, options.volume_samples, rng).estimate;
      case Functional::ReciprocalVolume: return reciprocal_volume_sample(s.body, options.reciprocal_repetitions, rng);
      case Functional::InscribedRadius: {
        const double r = inscribed_radius(s.body, options.inscribed).radius;
        stats.min_inscribed_radius = std::min(stats.min_inscribed_radius, r);
        return r;
      }
      case Functional::BallCount: return static_cast<double>(s.body.size());
    }
    return 0.0;
  };

  ChainState state = initial_state(space, tau);
  std::uint64_t block_start = 0;
  while (stats.blocks() < options.n_blocks) {
    if (stats.total_steps >= options.step_budget) {
      throw StepBudgetExceeded("run_regenerations: step budget of " + std::to_string(options.step_budget) +
                                   " exhausted after " + std::to_string(stats.blocks()) + " blocks",
                               std::move(stats));
    }
    if (options.observer) options.observer(state);
    for (Functional f : options.functionals) current[f] += evaluate(state, f);
    current_counts.push_back(state.body.size());

    state = chain_step(state, rng);
    ++stats.total_steps;
    if (state.last_regen_step == state.step) {
      stats.return_times.push_back(state.step - block_start);
      block_start = state.step;
      for (Functional f : options.functionals) {
        stats.block_sums[f].push_back(current[f]);
        current[f] = 0.0;
      }
      for (std::size_t c : current_counts) ++stats.ball_count_histogram[c];
      current_counts.clear();
    }
  }
  return stats;
}

Estimate stationary_estimate(const RegenStats& stats, Functional f) {
  const std::size_t n = stats.blocks();
  if (n < 2) throw UsageError("stationary_estimate: needs at least 2 blocks");
  const auto it = stats.block_sums.find(f);
  if (it == stats.block_sums.end()) throw UsageError("stationary_estimate: functional not recorded");
  const auto& sums = it->second;

  std::vector<double> lengths(stats.return_times.begin(), stats.return_times.end());
  const double mean_y = kahan_mean(sums);
  const double mean_t = kahan_mean(lengths);
  const double ratio = mean_y / mean_t;

  std::vector<double> resid(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = sums[i] - ratio * lengths[i];
    resid[i] = r * r;
  }
  const double var = kahan_sum(resid) / static_cast<double>(n - 1);
  return {ratio, std::sqrt(var / static_cast<double>(n)) / mean_t};
}

}  // namespace vpchain
