#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vpchain/chain.hpp"
#include "vpchain/geometry.hpp"
#include "vpchain/stats.hpp"

namespace vpchain {

/// Geometric-sum representation of the leftmost-path attach epochs:
/// G_k ~ Geometric(p_k) given the chain, p_k = vol(tilde J_k) / vol(K),
/// S_k = G_1 + ... + G_k, S_0 = 0.
struct GeometricSumPath {
  /// Hit-or-miss estimates of p_k (diagnostic; the draws are exact).
  std::vector<double> successes;
  std::vector<double> gaps;          // G_1, G_2, ...
  std::vector<double> partial_sums;  // S_0 = 0, S_1, ...
};

/// Runs the chain from K for k_max steps alongside the geometric draws.
/// Each G_k is drawn exactly by thinning: Geometric(b_k) gaps, with b_k the
/// known envelope probability from the proposal constraint, accepted by an
/// acceptance_trial of the current set.
GeometricSumPath simulate_geometric_sums(std::size_t k_max, const NormedSpace& space, double tau, const BodySpec& body,
                                         Rng& rng, std::uint64_t success_samples = 256);

/// L_n = max{k : 1 + S_k <= n} for every n in ns (any order), from a single
/// path. With a shared rng the result is nondecreasing in n.
std::vector<std::uint64_t> simulate_Ln_duality(std::span<const std::uint64_t> ns, const NormedSpace& space,
                                               double tau, const BodySpec& body, Rng& rng);
std::uint64_t simulate_Ln_duality(std::uint64_t n, const NormedSpace& space, double tau, const BodySpec& body,
                                  Rng& rng);

struct LimitSample {
  double s_infinity = 0.0;
  int truncation_level = 0;
  double truncation_bound = 0.0;
};

/// Number of stationary warm-up steps taken from B_1 before the segment whose
/// reversed volumes drive the exponentials.
inline constexpr std::uint64_t kDefaultWarmup = 200;

/// Smallest level L whose expected tail sum_{l > L} E(E_l) is below tol,
/// using the inscribed-ball volume floor vol(B_1) 2^{-d(d+1)}.
int s_infinity_truncation_level(const NormedSpace& space, double tau, double body_volume, double tol);
double s_infinity_tail_bound(const NormedSpace& space, double tau, double body_volume, int level);

/// One draw of S_inf = sum_l E_l, E_l ~ Exp(vol(J_inf^(l)) / vol(K)), truncated
/// at the deterministic tail bound. J_inf^(l) = tau^{-l} X^(l) where X^(0),
/// X^(1), ... are consecutive stationary states read backwards in time.
LimitSample simulate_S_infinity(const NormedSpace& space, double tau, const BodySpec& body, Rng& rng, double tol,
                                std::uint64_t warmup = kDefaultWarmup);

struct Theorem2Point {
  double x = 0.0;
  int s = 0;
  int n = 0;
  std::uint64_t sample_size = 0;  // floor(x tau^{-n d})
  double lhs = 0.0;               // P{L_N <= n + s}
  Interval lhs_ci;
  double rhs = 0.0;               // P{S_inf >= x tau^{s d}}
  Interval rhs_ci;
  bool overlap = false;
  // Unwinding the duality gives {L_N <= m} = {1 + S_{m+1} > N}, so the
  // limit of lhs is P{S_inf >= x tau^{(s+1) d}}. Reported alongside.
  double rhs_shifted = 0.0;
  Interval rhs_shifted_ci;
  bool overlap_shifted = false;
};

struct Theorem2Options {
  std::uint64_t replicas = 2000;
  double tol = 1e-6;
  std::uint64_t warmup = kDefaultWarmup;
};

/// Both sides for every (x, s) pair; one L_N sample per x and one S_inf
/// sample serve the whole grid.
std::vector<Theorem2Point> theorem2_grid(std::span<const double> xs, std::span<const int> ss, int n,
                                         const NormedSpace& space, double tau, const BodySpec& body,
                                         std::uint64_t seed, const Theorem2Options& options = {});
Theorem2Point theorem2_check(double x, int s, int n, const NormedSpace& space, double tau, const BodySpec& body,
                             std::uint64_t seed, const Theorem2Options& options = {});

struct LlnRow {
  std::uint64_t n = 0;
  std::uint64_t replicas = 0;
  double mean_ratio = 0.0;  // mean of L_n / ln n
  double std_error = 0.0;
  double target = 0.0;      // 1 / (d ln(1/tau))
};

double lln_target(const NormedSpace& space, double tau);

/// Replicas share their random stream across ns.
std::vector<LlnRow> lln_table(std::span<const std::uint64_t> ns, std::uint64_t replicas, const NormedSpace& space,
                              double tau, const BodySpec& body, std::uint64_t seed);

/// True iff |mean - target| is nonincreasing along the rows.
bool lln_monotone_toward_target(std::span<const LlnRow> rows);

struct HeightRow {
  std::uint64_t n = 0;
  double mean_ratio = 0.0;  // mean of H_n / L_n over replicas with L_n >= 1
  double std_error = 0.0;
  std::uint64_t used = 0;
  std::uint64_t excluded = 0;  // replicas with L_n = 0
};

/// Direct tree construction; each replica's tree grows through all ns.
std::vector<HeightRow> height_ratio_experiment(std::span<const std::uint64_t> ns, std::uint64_t replicas,
                                               const NormedSpace& space, double tau, const BodySpec& body,
                                               std::uint64_t seed);

struct DualityComparison {
  std::vector<double> direct;
  std::vector<double> duality;
  KsResult ks;
};

/// Leftmost-path lengths of `replicas` directly built n-point trees against
/// the same number of duality draws.
DualityComparison compare_duality(std::uint64_t n, std::uint64_t replicas, const NormedSpace& space, double tau,
                                  const BodySpec& body, std::uint64_t seed);

}  // namespace vpchain
