#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "vpchain/limits.hpp"

using namespace vpchain;

namespace {

// E G_1 and P{G_1 = 1} for d=1, K=[-1,1], tau=1/2 by midpoint quadrature over
// the first point u: p_1 = |[-1,1] ∩ [u - 1/2, u + 1/2]| / 2.
struct FirstGap {
  double mean;
  double p_one;
};

FirstGap first_gap_oracle() {
  const int steps = 200000;
  double mean = 0.0, p_one = 0.0;
  for (int i = 0; i < steps; ++i) {
    const double u = -1.0 + (i + 0.5) * 2.0 / steps;
    const double len = std::min(1.0, u + 0.5) - std::max(-1.0, u - 0.5);
    const double p = len / 2.0;
    mean += 1.0 / p;
    p_one += p;
  }
  return {mean / steps, p_one / steps};
}

}  // namespace

TEST_CASE("first geometric gap matches quadrature in d=1") {
  const auto oracle = first_gap_oracle();
  CHECK(oracle.mean == doctest::Approx(1.0 + 2.0 * std::numbers::ln2).epsilon(1e-6));
  CHECK(oracle.p_one == doctest::Approx(0.4375).epsilon(1e-6));

  const NormedSpace space(1, NormKind::Linf);
  Rng rng(3);
  const int n = 40000;
  std::vector<double> g(n);
  int ones = 0;
  for (int i = 0; i < n; ++i) {
    g[i] = simulate_geometric_sums(1, space, 0.5, {}, rng, 0).gaps[0];
    ones += g[i] == 1.0 ? 1 : 0;
  }
  const auto s = summarize(g);
  CHECK(std::abs(s.mean - oracle.mean) <= 4.0 * s.std_error);
  const double p = static_cast<double>(ones) / n;
  CHECK(std::abs(p - oracle.p_one) <= 4.0 * std::sqrt(oracle.p_one * (1 - oracle.p_one) / n));
}

TEST_CASE("geometric-sum path invariants") {
  Rng rng(9);
  for (auto kind : {NormKind::L1, NormKind::L2, NormKind::Linf}) {
    const NormedSpace space(2, kind);
    for (const BodySpec body : {BodySpec{}, BodySpec{BodySpec::Kind::Cube, 1.0}}) {
      const auto path = simulate_geometric_sums(12, space, 4.0 / 7.0, body, rng);
      REQUIRE(path.gaps.size() == 12);
      REQUIRE(path.successes.size() == 12);
      REQUIRE(path.partial_sums.size() == 13);
      CHECK(path.partial_sums[0] == 0.0);
      for (std::size_t k = 0; k < 12; ++k) {
        CHECK(path.gaps[k] >= 1.0);
        CHECK(path.gaps[k] == std::floor(path.gaps[k]));
        CHECK(path.partial_sums[k + 1] > path.partial_sums[k]);
        CHECK(path.successes[k] > 0.0);
        CHECK(path.successes[k] <= 1.0);
      }
    }
  }
}

TEST_CASE("tau^{dk} S_k stabilizes") {
  const NormedSpace space(2, NormKind::L2);
  const double tau = 4.0 / 7.0;
  const int paths = 3000;
  std::vector<std::vector<double>> scaled(21, std::vector<double>(paths));
  Rng rng(12);
  for (int p = 0; p < paths; ++p) {
    const auto path = simulate_geometric_sums(20, space, tau, {}, rng, 0);
    for (int k = 10; k <= 20; ++k) scaled[k][p] = std::pow(tau, 2.0 * k) * path.partial_sums[k];
  }
  for (int k = 10; k < 20; ++k) {
    const auto a = summarize(scaled[k]);
    const auto b = summarize(scaled[20]);
    INFO("k=" << k << " mean=" << a.mean << " mean20=" << b.mean);
    CHECK(std::abs(a.mean - b.mean) <= 2.0 * std::hypot(a.std_error, b.std_error));
  }
}

TEST_CASE("duality: n = 1 gives L = 0 and outputs are monotone in n") {
  const NormedSpace space(2, NormKind::L2);
  Rng rng(1);
  for (int i = 0; i < 100; ++i) CHECK(simulate_Ln_duality(1, space, 4.0 / 7.0, {}, rng) == 0);

  const std::vector<std::uint64_t> ns{1, 2, 5, 10, 100, 1000, 10000, 100000};
  for (int i = 0; i < 200; ++i) {
    const auto out = simulate_Ln_duality(ns, space, 4.0 / 7.0, {}, rng);
    CHECK(std::is_sorted(out.begin(), out.end()));
    CHECK(out[0] == 0);
  }
  // Order of ns does not matter.
  const std::vector<std::uint64_t> rev(ns.rbegin(), ns.rend());
  Rng a(5), b(5);
  auto fwd = simulate_Ln_duality(ns, space, 0.5, {}, a);
  auto bwd = simulate_Ln_duality(rev, space, 0.5, {}, b);
  std::reverse(bwd.begin(), bwd.end());
  CHECK(fwd == bwd);
  CHECK_THROWS_AS(simulate_Ln_duality(0, space, 0.5, {}, a), UsageError);
}

TEST_CASE("duality agrees with direct trees at small n") {
  const NormedSpace space(2, NormKind::L2);
  const auto cmp = compare_duality(60, 600, space, 4.0 / 7.0, {}, 77);
  INFO("D=" << cmp.ks.statistic << " p=" << cmp.ks.p_value);
  CHECK(cmp.ks.p_value > 0.01);
  CHECK(cmp.direct.size() == 600);
  CHECK(cmp.duality.size() == 600);
}

TEST_CASE("S_infinity samples are positive with a bounded tail") {
  const NormedSpace space(2, NormKind::L2);
  const double tau = 4.0 / 7.0;
  const double vol = space.unit_ball_volume();
  Rng rng(4);
  for (double tol : {1e-3, 1e-6}) {
    for (int i = 0; i < 100; ++i) {
      const auto s = simulate_S_infinity(space, tau, {}, rng, tol, 50);
      CHECK(s.s_infinity > 0.0);
      CHECK(s.truncation_bound < tol);
      CHECK(s.truncation_level >= 0);
    }
  }
  // Tail bound by hand: vol(K) (tau^d)^{L+1} / (vol(B_{1/8}) (1 - tau^d)).
  const double td = tau * tau;
  const double floor = std::numbers::pi / 64.0;
  CHECK(s_infinity_tail_bound(space, tau, vol, 3) == doctest::Approx(vol * std::pow(td, 4) / (floor * (1 - td))));
  const int level = s_infinity_truncation_level(space, tau, vol, 1e-6);
  CHECK(s_infinity_tail_bound(space, tau, vol, level) < 1e-6);
  CHECK(s_infinity_tail_bound(space, tau, vol, level - 1) >= 1e-6);
  CHECK_THROWS_AS(s_infinity_truncation_level(space, tau, vol, 0.0), UsageError);
}

TEST_CASE("S_infinity mean is stable under doubling and matches the stationary identity") {
  const NormedSpace space(2, NormKind::L2);
  const double tau = 4.0 / 7.0;
  Rng rng(15);
  std::vector<double> draws(4000);
  for (auto& v : draws) v = simulate_S_infinity(space, tau, {}, rng, 1e-6, 100).s_infinity;
  const auto half = summarize(std::span<const double>(draws).first(2000));
  const auto full = summarize(draws);
  CHECK(std::abs(half.mean - full.mean) <= 3.0 * half.std_error);

  RegenOptions opts;
  opts.n_blocks = 1500;
  opts.functionals = {Functional::ReciprocalVolume};
  Rng chain_rng(16);
  const auto stats = run_regenerations(space, tau, chain_rng, opts);
  const auto inv = stationary_estimate(stats, Functional::ReciprocalVolume);
  const double scale = space.unit_ball_volume() / (1.0 - tau * tau);
  const auto a = normal_interval(full.mean, full.std_error);
  const auto b = normal_interval(scale * inv.value, scale * inv.std_error);
  INFO("mean S=" << full.mean << " identity=" << scale * inv.value);
  CHECK(a.overlaps(b));
}

TEST_CASE("theorem2 limits in s and determinism") {
  const NormedSpace space(2, NormKind::L2);
  Theorem2Options opts;
  opts.replicas = 200;
  opts.warmup = 50;
  const double xs[] = {1.0};
  const int ss[] = {-20, 20};
  const auto grid = theorem2_grid(xs, ss, 4, space, 4.0 / 7.0, {}, 123, opts);
  REQUIRE(grid.size() == 2);
  CHECK(grid[0].lhs == 0.0);
  CHECK(grid[0].rhs == 0.0);
  CHECK(grid[1].lhs == 1.0);
  CHECK(grid[1].rhs == 1.0);
  CHECK(grid[0].overlap);
  CHECK(grid[1].overlap);
  CHECK(grid[0].sample_size == static_cast<std::uint64_t>(std::floor(std::pow(4.0 / 7.0, -8.0))));

  const auto again = theorem2_check(1.0, 20, 4, space, 4.0 / 7.0, {}, 123, opts);
  CHECK(again.lhs == grid[1].lhs);
  CHECK(again.rhs == grid[1].rhs);
  CHECK_THROWS_AS(theorem2_check(0.0, 0, 4, space, 4.0 / 7.0, {}, 1, opts), UsageError);
}

TEST_CASE("lln targets and table schema") {
  CHECK(lln_target(NormedSpace(1, NormKind::Linf), 0.5) == doctest::Approx(1.4427).epsilon(1e-4));
  CHECK(lln_target(NormedSpace(2, NormKind::L2), 0.5) == doctest::Approx(0.7213).epsilon(1e-4));

  const NormedSpace space(1, NormKind::Linf);
  const BodySpec cube{BodySpec::Kind::Cube, 1.0};
  const std::vector<std::uint64_t> ns{100, 1000, 10000};
  const auto rows = lln_table(ns, 50, space, 0.5, cube, 3);
  REQUIRE(rows.size() == 3);
  for (const auto& r : rows) {
    CHECK(r.replicas == 50);
    CHECK(std::isfinite(r.mean_ratio));
    CHECK(r.std_error >= 0.0);
    CHECK(r.target == doctest::Approx(1.0 / std::numbers::ln2));
  }
  // Deterministic in the seed and independent of thread scheduling.
  const auto again = lln_table(ns, 50, space, 0.5, cube, 3);
  for (std::size_t i = 0; i < rows.size(); ++i) CHECK(rows[i].mean_ratio == again[i].mean_ratio);

  const std::vector<std::uint64_t> bad{10, 5};
  CHECK_THROWS_AS(lln_table(bad, 50, space, 0.5, cube, 3), UsageError);
}

TEST_CASE("lln monotone flag") {
  const std::vector<LlnRow> toward{{10, 1, 1.0, 0, 1.44}, {100, 1, 1.2, 0, 1.44}, {1000, 1, 1.3, 0, 1.44}};
  const std::vector<LlnRow> away{{10, 1, 1.3, 0, 1.44}, {100, 1, 1.2, 0, 1.44}};
  CHECK(lln_monotone_toward_target(toward));
  CHECK_FALSE(lln_monotone_toward_target(away));
}

TEST_CASE("height ratio table") {
  const NormedSpace space(2, NormKind::L2);
  const std::vector<std::uint64_t> ns{1, 50, 500, 2000};
  const auto rows = height_ratio_experiment(ns, 40, space, 4.0 / 7.0, {}, 8);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].used == 0);
  CHECK(rows[0].excluded == 40);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i].used + rows[i].excluded == 40);
    CHECK(rows[i].mean_ratio >= 1.0);
    CHECK(std::isfinite(rows[i].mean_ratio));
  }
}
