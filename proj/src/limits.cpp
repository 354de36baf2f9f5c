#include "vpchain/limits.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "vpchain/parallel.hpp"
#include "vpchain/vptree.hpp"

namespace vpchain {

namespace {

// Stream tags keep the random streams of different experiment parts apart.
constexpr std::uint64_t kTagDuality = 0x11;
constexpr std::uint64_t kTagDirect = 0x12;
constexpr std::uint64_t kTagSInfinity = 0x21;
constexpr std::uint64_t kTagTheorem2Lhs = 0x22;
constexpr std::uint64_t kTagLln = 0x31;
constexpr std::uint64_t kTagHeight = 0x41;

constexpr std::uint64_t kThinningBudget = 100'000'000;

// Trials until the first success of a Bernoulli(b * a) sequence, where b is
// known and a is the acceptance probability of `set`.
double thinned_geometric(double envelope, const BallIntersection& set, Rng& rng) {
  double g = 0.0;
  for (std::uint64_t t = 0;; ++t) {
    if (t >= kThinningBudget) throw DegenerateSetError("thinned_geometric: acceptance budget exhausted");
    g += rng.geometric(envelope);
    if (acceptance_trial(set, rng)) return g;
  }
}

// Exp(rate * a): first accepted arrival of a rate-`rate` Poisson stream.
double thinned_exponential(double rate, const BallIntersection& set, Rng& rng) {
  double e = 0.0;
  for (std::uint64_t t = 0;; ++t) {
    if (t >= kThinningBudget) throw DegenerateSetError("thinned_exponential: acceptance budget exhausted");
    e += rng.exponential(rate);
    if (acceptance_trial(set, rng)) return e;
  }
}

// Envelope probability vol(proposal of hat J_k) tau^{kd} / vol(K). At most 1
// because the image of K is one of the constraints (or contains one).
double envelope(const ChainState& state, double tau, std::size_t k, double body_volume) {
  const double d = static_cast<double>(state.body.space().dim());
  return std::min(1.0, std::pow(tau, static_cast<double>(k) * d) * state.body.proposal_volume() / body_volume);
}

}  // namespace

GeometricSumPath simulate_geometric_sums(std::size_t k_max, const NormedSpace& space, double tau, const BodySpec& body,
                                         Rng& rng, std::uint64_t success_samples) {
  const double body_volume = body.volume(space);
  GeometricSumPath path;
  path.partial_sums.push_back(0.0);
  ChainState state = initial_state(space, tau, body);
  for (std::size_t k = 1; k <= k_max; ++k) {
    state = chain_step(state, rng);
    const double b = envelope(state, tau, k, body_volume);
    if (success_samples > 0) {
      path.successes.push_back(b * volume_estimate(state.body, success_samples, rng).estimate /
                               state.body.proposal_volume());
    }
    const double g = thinned_geometric(b, state.body, rng);
    path.gaps.push_back(g);
    path.partial_sums.push_back(path.partial_sums.back() + g);
  }
  return path;
}

std::vector<std::uint64_t> simulate_Ln_duality(std::span<const std::uint64_t> ns, const NormedSpace& space,
                                               double tau, const BodySpec& body, Rng& rng) {
  std::vector<std::uint64_t> out(ns.size(), 0);
  if (ns.empty()) return out;
  for (auto n : ns)
    if (n < 1) throw UsageError("n: must be >= 1");
  const double n_max = static_cast<double>(*std::max_element(ns.begin(), ns.end()));
  const double body_volume = body.volume(space);

  ChainState state = initial_state(space, tau, body);
  double s = 0.0;  // S_k
  for (std::uint64_t k = 0;; ++k) {
    // Here 1 + S_k <= n_max; record k for every n it fits.
    for (std::size_t i = 0; i < ns.size(); ++i)
      if (1.0 + s <= static_cast<double>(ns[i])) out[i] = k;
    state = chain_step(state, rng);
    s += thinned_geometric(envelope(state, tau, k + 1, body_volume), state.body, rng);
    if (1.0 + s > n_max) return out;
  }
}

std::uint64_t simulate_Ln_duality(std::uint64_t n, const NormedSpace& space, double tau, const BodySpec& body,
                                  Rng& rng) {
  const std::uint64_t ns[] = {n};
  return simulate_Ln_duality(ns, space, tau, body, rng).front();
}

double s_infinity_tail_bound(const NormedSpace& space, double tau, double body_volume, int level) {
  const double d = static_cast<double>(space.dim());
  const double floor_volume = space.ball_volume(std::pow(2.0, -d - 1.0));
  const double td = std::pow(tau, d);
  return body_volume * std::pow(td, level + 1.0) / (floor_volume * (1.0 - td));
}

int s_infinity_truncation_level(const NormedSpace& space, double tau, double body_volume, double tol) {
  if (!(tol > 0)) throw UsageError("tol: must be positive");
  int level = 0;
  while (s_infinity_tail_bound(space, tau, body_volume, level) >= tol) ++level;
  return level;
}

LimitSample simulate_S_infinity(const NormedSpace& space, double tau, const BodySpec& body, Rng& rng, double tol,
                                std::uint64_t warmup) {
  check_tau(tau);
  const double body_volume = body.volume(space);
  const int level = s_infinity_truncation_level(space, tau, body_volume, tol);
  const double d = static_cast<double>(space.dim());

  // Keep the last level + 1 states; states.back() is X^(0).
  std::deque<ChainState> states;
  ChainState state = initial_state(space, tau);
  const std::uint64_t total = warmup + static_cast<std::uint64_t>(level);
  for (std::uint64_t h = 0; h < total; ++h) {
    if (h + static_cast<std::uint64_t>(level) + 1 > total) states.push_back(state);
    state = chain_step(state, rng);
  }
  states.push_back(state);

  std::vector<double> terms;
  terms.reserve(states.size());
  for (int l = 0; l <= level; ++l) {
    const auto& x = states[states.size() - 1 - static_cast<std::size_t>(l)].body;
    const double rate = std::pow(tau, -l * d) * x.proposal_volume() / body_volume;
    terms.push_back(thinned_exponential(rate, x, rng));
  }
  const double s = kahan_sum(terms);
  if (!std::isfinite(s) || !(s > 0)) throw NumericalError("simulate_S_infinity: non-finite sum", s, Point());
  return {s, level, s_infinity_tail_bound(space, tau, body_volume, level)};
}

std::vector<Theorem2Point> theorem2_grid(std::span<const double> xs, std::span<const int> ss, int n,
                                         const NormedSpace& space, double tau, const BodySpec& body,
                                         std::uint64_t seed, const Theorem2Options& options) {
  check_tau(tau);
  for (double x : xs)
    if (!(x > 0)) throw UsageError("x: must be positive");
  if (n < 0) throw UsageError("n: must be >= 0");
  const std::uint64_t reps = options.replicas;
  const double d = static_cast<double>(space.dim());

  std::vector<double> s_inf(reps);
  parallel_for(reps, [&](std::size_t i) {
    Rng rng = Rng::stream(seed, kTagSInfinity, i);
    s_inf[i] = simulate_S_infinity(space, tau, body, rng, options.tol, options.warmup).s_infinity;
  });

  std::vector<Theorem2Point> out;
  for (std::size_t xi = 0; xi < xs.size(); ++xi) {
    const double x = xs[xi];
    const auto big_n = static_cast<std::uint64_t>(std::floor(x * std::pow(tau, -n * d)));
    std::vector<std::uint64_t> lengths(reps, 0);
    if (big_n >= 1) {
      parallel_for(reps, [&](std::size_t i) {
        Rng rng = Rng::stream(seed, kTagTheorem2Lhs + (xi << 8), i);
        lengths[i] = simulate_Ln_duality(big_n, space, tau, body, rng);
      });
    }
    for (int s : ss) {
      Theorem2Point p;
      p.x = x;
      p.s = s;
      p.n = n;
      p.sample_size = big_n;
      const long long bound = static_cast<long long>(n) + s;
      const auto lhs_hits = static_cast<std::size_t>(std::count_if(
          lengths.begin(), lengths.end(), [&](std::uint64_t l) { return static_cast<long long>(l) <= bound; }));
      const double threshold = x * std::pow(tau, s * d);
      const auto rhs_hits = static_cast<std::size_t>(
          std::count_if(s_inf.begin(), s_inf.end(), [&](double v) { return v >= threshold; }));
      const double shifted = x * std::pow(tau, (s + 1) * d);
      const auto shifted_hits = static_cast<std::size_t>(
          std::count_if(s_inf.begin(), s_inf.end(), [&](double v) { return v >= shifted; }));
      p.lhs = static_cast<double>(lhs_hits) / static_cast<double>(reps);
      p.rhs = static_cast<double>(rhs_hits) / static_cast<double>(reps);
      p.rhs_shifted = static_cast<double>(shifted_hits) / static_cast<double>(reps);
      p.lhs_ci = wilson_interval(lhs_hits, reps);
      p.rhs_ci = wilson_interval(rhs_hits, reps);
      p.rhs_shifted_ci = wilson_interval(shifted_hits, reps);
      p.overlap = p.lhs_ci.overlaps(p.rhs_ci);
      p.overlap_shifted = p.lhs_ci.overlaps(p.rhs_shifted_ci);
      out.push_back(p);
    }
  }
  return out;
}

Theorem2Point theorem2_check(double x, int s, int n, const NormedSpace& space, double tau, const BodySpec& body,
                             std::uint64_t seed, const Theorem2Options& options) {
  const double xs[] = {x};
  const int ss[] = {s};
  return theorem2_grid(xs, ss, n, space, tau, body, seed, options).front();
}

double lln_target(const NormedSpace& space, double tau) {
  return 1.0 / (static_cast<double>(space.dim()) * std::log(1.0 / tau));
}

std::vector<LlnRow> lln_table(std::span<const std::uint64_t> ns, std::uint64_t replicas, const NormedSpace& space,
                              double tau, const BodySpec& body, std::uint64_t seed) {
  check_tau(tau);
  if (replicas < 2) throw UsageError("replicas: must be >= 2");
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (ns[i] < 2) throw UsageError("ns: entries must be >= 2");
    if (i > 0 && ns[i] <= ns[i - 1]) throw UsageError("ns: must be strictly increasing");
  }
  std::vector<std::vector<std::uint64_t>> per_replica(replicas);
  parallel_for(replicas, [&](std::size_t r) {
    Rng rng = Rng::stream(seed, kTagLln, r);
    per_replica[r] = simulate_Ln_duality(ns, space, tau, body, rng);
  });
  std::vector<LlnRow> rows;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    std::vector<double> ratios(replicas);
    const double log_n = std::log(static_cast<double>(ns[i]));
    for (std::size_t r = 0; r < replicas; ++r) ratios[r] = static_cast<double>(per_replica[r][i]) / log_n;
    const auto summary = summarize(ratios);
    rows.push_back({ns[i], replicas, summary.mean, summary.std_error, lln_target(space, tau)});
  }
  return rows;
}

bool lln_monotone_toward_target(std::span<const LlnRow> rows) {
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (std::abs(rows[i].mean_ratio - rows[i].target) > std::abs(rows[i - 1].mean_ratio - rows[i - 1].target))
      return false;
  }
  return true;
}

std::vector<HeightRow> height_ratio_experiment(std::span<const std::uint64_t> ns, std::uint64_t replicas,
                                               const NormedSpace& space, double tau, const BodySpec& body,
                                               std::uint64_t seed) {
  check_tau(tau);
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (ns[i] < 1) throw UsageError("ns: entries must be >= 1");
    if (i > 0 && ns[i] <= ns[i - 1]) throw UsageError("ns: must be strictly increasing");
  }
  // ratios[r][i] is NaN when L_n = 0.
  std::vector<std::vector<double>> ratios(replicas, std::vector<double>(ns.size()));
  const auto set = body.make(space);
  parallel_for(replicas, [&](std::size_t r) {
    Rng rng = Rng::stream(seed, kTagHeight, r);
    VpTree tree(space, tau);
    std::size_t next = 0;
    for (std::uint64_t count = 1; next < ns.size(); ++count) {
      tree.insert(sample_uniform(set, rng));
      if (count == ns[next]) {
        const auto l = tree.leftmost_path_length();
        ratios[r][next] = l == 0 ? std::numeric_limits<double>::quiet_NaN()
                                 : static_cast<double>(tree.height()) / static_cast<double>(l);
        ++next;
      }
    }
  });
  std::vector<HeightRow> rows;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    std::vector<double> used;
    for (std::size_t r = 0; r < replicas; ++r)
      if (!std::isnan(ratios[r][i])) used.push_back(ratios[r][i]);
    const auto summary = summarize(used);
    rows.push_back({ns[i], summary.mean, summary.std_error, used.size(), replicas - used.size()});
  }
  return rows;
}

DualityComparison compare_duality(std::uint64_t n, std::uint64_t replicas, const NormedSpace& space, double tau,
                                  const BodySpec& body, std::uint64_t seed) {
  check_tau(tau);
  if (replicas < 1) throw UsageError("replicas: must be >= 1");
  DualityComparison out;
  out.direct.resize(replicas);
  out.duality.resize(replicas);
  const auto set = body.make(space);
  parallel_for(replicas, [&](std::size_t r) {
    Rng rng = Rng::stream(seed, kTagDirect, r);
    VpTree tree(space, tau);
    for (std::uint64_t i = 0; i < n; ++i) tree.insert(sample_uniform(set, rng));
    out.direct[r] = static_cast<double>(tree.leftmost_path_length());
  });
  parallel_for(replicas, [&](std::size_t r) {
    Rng rng = Rng::stream(seed, kTagDuality, r);
    out.duality[r] = static_cast<double>(simulate_Ln_duality(n, space, tau, body, rng));
  });
  out.ks = ks_two_sample(out.direct, out.duality);
  return out;
}

}  // namespace vpchain
