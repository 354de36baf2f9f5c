#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "vpchain/chain.hpp"
#include "vpchain/stats.hpp"

using namespace vpchain;

namespace {

const NormKind kKinds[] = {NormKind::L1, NormKind::L2, NormKind::Linf};

bool has_unit_ball(const BallIntersection& body) {
  for (const auto& b : body.balls())
    if (b.radius == 1.0 && body.space().norm(b.center) == 0.0) return true;
  return false;
}

}  // namespace

TEST_CASE("forced u = 0 keeps the unit ball") {
  const NormedSpace space(2, NormKind::L2);
  const auto s0 = initial_state(space, 4.0 / 7.0);
  CHECK(s0.regen_count == 1);
  const auto s1 = chain_step(s0, Point::zero(2));
  REQUIRE(s1.body.balls().size() == 1);
  CHECK(s1.body.balls()[0].radius == 1.0);
  CHECK(s1.step == 1);
  CHECK(s1.regen_count == 2);
  CHECK(s1.last_regen_step == 1);
}

TEST_CASE("forced step in d=1 Linf, tau=1/2") {
  const NormedSpace space(1, NormKind::Linf);
  const auto s1 = chain_step(initial_state(space, 0.5), Point{0.8});
  REQUIRE(s1.body.balls().size() == 2);
  CHECK(s1.body.balls()[0].center[0] == doctest::Approx(-1.6));
  CHECK(s1.body.balls()[0].radius == doctest::Approx(2.0));
  CHECK(s1.body.balls()[1].center[0] == 0.0);
  CHECK(s1.body.balls()[1].radius == 1.0);
  // Interval oracle: [-1.6 - 2, -1.6 + 2] ∩ [-1, 1] = [-1, 0.4].
  CHECK(polyhedron_contains(s1.body, Point{-1.0}));
  CHECK(polyhedron_contains(s1.body, Point{0.4}));
  CHECK_FALSE(polyhedron_contains(s1.body, Point{0.41}));
  CHECK_FALSE(polyhedron_contains(s1.body, Point{-1.01}));
  CHECK(s1.regen_count == 1);
  CHECK(s1.last_regen_step == 0);
}

TEST_CASE("u inside B_{1-tau} returns to the unit ball") {
  Rng rng(17);
  for (auto kind : kKinds) {
    const NormedSpace space(2, kind);
    const double tau = 4.0 / 7.0;
    const auto s0 = initial_state(space, tau);
    for (int t = 0; t < 200; ++t) {
      Point u = sample_uniform_unit_ball(space, rng);
      u *= (1.0 - tau);
      CHECK(is_unit_ball(chain_step(s0, u).body));
    }
    // Just outside B_{1-tau}: the shifted ball cuts B_1.
    Point u(2);
    u[0] = (1.0 - tau) * 1.01;
    CHECK_FALSE(is_unit_ball(chain_step(s0, u).body));
  }
}

TEST_CASE("is_unit_ball examples") {
  const NormedSpace l2(2, NormKind::L2);
  CHECK(is_unit_ball(BallIntersection::unit_ball(l2)));
  CHECK(is_unit_ball(BallIntersection(l2, {{{0.0, 0.0}, 1.0}, {{0.9, 0.0}, 2.0}})));
  CHECK_FALSE(is_unit_ball(BallIntersection(l2, {{{0.0, 0.0}, 1.0}, {{1.5, 0.0}, 2.0}})));
  CHECK_FALSE(is_unit_ball(BallIntersection::cube(l2, 1.0)));
}

TEST_CASE("tau outside (0,1) is a usage error") {
  const NormedSpace space(2, NormKind::L2);
  CHECK_THROWS_AS(initial_state(space, 1.0), UsageError);
  CHECK_THROWS_AS(initial_state(space, 0.0), UsageError);
  CHECK_THROWS_AS(initial_state(space, std::nan("")), UsageError);
}

TEST_CASE("trajectory invariants: origin, unit ball, radius ladder") {
  for (auto kind : kKinds) {
    for (std::size_t d = 1; d <= 3; ++d) {
      for (double tau : {0.5, 4.0 / 7.0}) {
        const NormedSpace space(d, kind);
        Rng rng(1000 + d);
        auto state = initial_state(space, tau);
        for (int h = 0; h < 2000; ++h) {
          state = chain_step(state, rng);
          REQUIRE(polyhedron_contains(state.body, Point::zero(d)));
          REQUIRE(has_unit_ball(state.body));
          const auto exps = radius_exponents(state.body, tau);
          REQUIRE(exps.has_value());
          const std::set<int> distinct(exps->begin(), exps->end());
          CHECK(distinct.size() == exps->size());
          CHECK(*distinct.begin() == 0);
          // A ball of exponent k was appended k steps ago, after the last
          // visit to B_1 at the latest.
          CHECK(static_cast<std::uint64_t>(*distinct.rbegin()) <= state.step - *state.last_regen_step);
          // Sampled points stay inside B_1.
          for (int s = 0; s < 5; ++s) CHECK(space.norm(sample_uniform(state.body, rng)) <= 1.0);
        }
      }
    }
  }
}

TEST_CASE("inscribed radius stays above 2^{-d-1}") {
  for (auto kind : kKinds) {
    for (std::size_t d = 1; d <= 3; ++d) {
      const NormedSpace space(d, kind);
      Rng rng(31 + d);
      auto state = initial_state(space, 4.0 / 7.0);
      const double floor = std::ldexp(1.0, -static_cast<int>(d) - 1);
      for (int h = 0; h < 500; ++h) {
        state = chain_step(state, rng);
        CHECK(inscribed_radius(state.body).radius >= floor - 1e-6);
      }
    }
  }
}

TEST_CASE("same seed gives a bit-identical trajectory") {
  const NormedSpace space(2, NormKind::L1);
  Rng a(99), b(99);
  auto sa = initial_state(space, 0.5);
  auto sb = initial_state(space, 0.5);
  for (int h = 0; h < 300; ++h) {
    const auto ta = chain_transition(sa, a);
    const auto tb = chain_transition(sb, b);
    REQUIRE(ta.u == tb.u);
    sa = ta.next;
    sb = tb.next;
    REQUIRE(sa.body.size() == sb.body.size());
    for (std::size_t i = 0; i < sa.body.balls().size(); ++i) {
      CHECK(sa.body.balls()[i].center == sb.body.balls()[i].center);
      CHECK(sa.body.balls()[i].radius == sb.body.balls()[i].radius);
    }
  }
}

TEST_CASE("one-step return probability is (1 - tau)^d") {
  const NormedSpace space(2, NormKind::L2);
  const double tau = 4.0 / 7.0;
  const double p = std::pow(1.0 - tau, 2.0);
  CHECK(p == doctest::Approx(9.0 / 49.0));
  Rng rng(5);
  const auto s0 = initial_state(space, tau);
  const int n = 20000;
  int hits = 0;
  for (int i = 0; i < n; ++i) hits += is_unit_ball(chain_step(s0, rng).body) ? 1 : 0;
  CHECK(std::abs(static_cast<double>(hits) / n - p) <= 3.0 * std::sqrt(p * (1 - p) / n));
}

TEST_CASE("run_regenerations bookkeeping and estimator identities") {
  const NormedSpace space(2, NormKind::L2);
  Rng rng(2024);
  RegenOptions opts;
  opts.n_blocks = 300;
  opts.functionals = {Functional::One, Functional::UnitBallIndicator, Functional::ReciprocalVolume,
                      Functional::BallCount};
  std::uint64_t observed = 0;
  opts.observer = [&](const ChainState&) { ++observed; };
  const auto stats = run_regenerations(space, 4.0 / 7.0, rng, opts);

  REQUIRE(stats.blocks() == 300);
  std::uint64_t total = 0;
  for (auto t : stats.return_times) {
    CHECK(t >= 1);
    total += t;
  }
  CHECK(total == stats.total_steps);
  CHECK(observed == stats.total_steps);
  std::uint64_t hist_total = 0;
  for (auto [count, freq] : stats.ball_count_histogram) {
    CHECK(count >= 1);
    hist_total += freq;
  }
  CHECK(hist_total == total);
  CHECK(std::isnan(stats.min_inscribed_radius));

  CHECK(stationary_estimate(stats, Functional::One).value == 1.0);
  const double mean_t = static_cast<double>(total) / stats.blocks();
  CHECK(stationary_estimate(stats, Functional::UnitBallIndicator).value == doctest::Approx(1.0 / mean_t));
  const auto rv = stationary_estimate(stats, Functional::ReciprocalVolume);
  CHECK(std::isfinite(rv.value));
  CHECK(rv.value >= 1.0 / std::numbers::pi);
  CHECK(rv.std_error > 0.0);
  CHECK_THROWS_AS(stationary_estimate(stats, Functional::Volume), UsageError);
}

TEST_CASE("stationary_estimate needs two blocks") {
  const NormedSpace space(1, NormKind::L2);
  Rng rng(1);
  RegenOptions opts;
  opts.n_blocks = 1;
  const auto stats = run_regenerations(space, 0.5, rng, opts);
  CHECK_THROWS_AS(stationary_estimate(stats, Functional::One), UsageError);
}

TEST_CASE("step budget exhaustion carries partial stats") {
  const NormedSpace space(3, NormKind::L2);
  Rng rng(1);
  RegenOptions opts;
  opts.n_blocks = 1000000;
  opts.step_budget = 500;
  opts.functionals = {Functional::One};
  try {
    run_regenerations(space, 0.5, rng, opts);
    FAIL("expected StepBudgetExceeded");
  } catch (const StepBudgetExceeded& e) {
    CHECK(e.partial().total_steps == 500);
    CHECK(e.partial().blocks() < 500);
  }
}

TEST_CASE("return-time survival decays geometrically") {
  const NormedSpace space(2, NormKind::Linf);
  Rng rng(8);
  RegenOptions opts;
  opts.n_blocks = 2000;
  opts.functionals = {Functional::One};
  const auto stats = run_regenerations(space, 4.0 / 7.0, rng, opts);
  auto times = stats.return_times;
  std::sort(times.begin(), times.end());
  const auto median = times[times.size() / 2];
  std::vector<double> t, log_surv;
  for (std::uint64_t k = median; k < times.back(); ++k) {
    const auto above = times.end() - std::upper_bound(times.begin(), times.end(), k);
    if (above < 10) break;
    t.push_back(static_cast<double>(k));
    log_surv.push_back(std::log(static_cast<double>(above) / times.size()));
  }
  REQUIRE(t.size() >= 2);
  CHECK(ols_slope(t, log_surv) < 0.0);
}

TEST_CASE("cube start reaches the unit ball") {
  const NormedSpace space(2, NormKind::L2);
  BodySpec cube{BodySpec::Kind::Cube, 1.0};
  auto state = initial_state(space, 0.5, cube);
  CHECK(state.regen_count == 0);
  CHECK(state.body.box().has_value());
  Rng rng(3);
  for (int h = 0; h < 200 && state.regen_count == 0; ++h) state = chain_step(state, rng);
  CHECK(state.regen_count >= 1);
}
