#include "vpchain/cli/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>
#include <sstream>

#include "vpchain/cli/output.hpp"
#include "vpchain/limits.hpp"
#include "vpchain/stats.hpp"
#include "vpchain/vptree.hpp"

namespace vpchain::cli {

namespace {

constexpr std::uint64_t kTagChainRun = 0x51;
constexpr std::uint64_t kTagRegen = 0x52;
constexpr std::uint64_t kTagNnBench = 0x53;
constexpr std::uint64_t kTagCertify = 0x54;

using Clock = std::chrono::steady_clock;
using json = nlohmann::ordered_json;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string str(double x) { return format_double(x); }

// Structural checks every chain state must pass. Returns an empty string on
// success, else a description of the first violation.
std::string state_violation(const ChainState& s) {
  const auto& space = s.body.space();
  if (!polyhedron_contains(s.body, Point::zero(space.dim())))
    return "step " + std::to_string(s.step) + ": origin outside the state";
  const auto exps = radius_exponents(s.body, s.tau);
  if (!exps) return "step " + std::to_string(s.step) + ": radius not an integer power of 1/tau";
  const std::set<int> distinct(exps->begin(), exps->end());
  if (distinct.size() != exps->size()) return "step " + std::to_string(s.step) + ": repeated radius";
  if (s.step >= 1 && (distinct.empty() || *distinct.begin() != 0))
    return "step " + std::to_string(s.step) + ": unit ball missing";
  return {};
}

class Timer {
 public:
  Timer() : t0_(Clock::now()) {}
  double elapsed() const { return seconds_since(t0_); }

 private:
  Clock::time_point t0_;
};

RunSummary start(std::string name, const ExperimentConfig& c) {
  RunSummary s;
  s.experiment = std::move(name);
  s.seed = c.require_seed();
  return s;
}

}  // namespace

bool RunSummary::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

nlohmann::ordered_json RunSummary::to_json() const {
  json j;
  j["experiment"] = experiment;
  j["seed"] = seed;
  j["wall_time_s"] = wall_time_s;
  json outs = json::array();
  for (const auto& p : outputs) outs.push_back(p.generic_string());
  j["outputs"] = outs;
  j["headline"] = headline;
  json cs = json::array();
  json failures = json::array();
  for (const auto& c : checks) {
    cs.push_back(json{{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    if (!c.passed) failures.push_back(c.name);
  }
  j["checks"] = cs;
  j["passed"] = passed();
  j["failures"] = failures;
  return j;
}

RunSummary cmd_chain_run(const ExperimentConfig& c) {
  const Timer timer;
  auto summary = start("chain-run", c);
  if (c.steps < 1) throw UsageError("chain-run.steps: must be >= 1");
  const auto space = c.space();
  Rng rng = Rng::stream(summary.seed, kTagChainRun, 0);

  std::vector<TrajectoryStep> steps;
  steps.push_back({initial_state(space, c.tau, c.body), std::nullopt});
  for (std::uint64_t h = 1; h < c.steps; ++h) {
    const auto& prev = steps.back().state;
    if (c.force_origin) {
      const Point u = Point::zero(space.dim());
      steps.push_back({chain_step(prev, u), u});
    } else {
      auto t = chain_transition(prev, rng);
      steps.push_back({std::move(t.next), t.u});
    }
  }

  const auto jsonl = c.out_dir / "chain_run.jsonl";
  write_text(jsonl, trajectory_jsonl(steps));
  summary.outputs.push_back(jsonl);

  CsvWriter csv(c.out_dir / "chain_run.csv", "chain-run", c, {"step", "regen", "ball_count", "has_box"});
  std::string violation;
  std::vector<std::uint64_t> returns;
  for (const auto& s : steps) {
    const bool regen = s.state.last_regen_step == s.state.step;
    if (regen && s.state.step > 0) returns.push_back(s.state.step);
    csv.row({cell(s.state.step), cell(regen), cell(static_cast<std::uint64_t>(s.state.body.size())),
             cell(s.state.body.box().has_value())});
    if (violation.empty()) violation = state_violation(s.state);
  }
  summary.outputs.push_back(csv.path());

  if (space.dim() == 2) {
    const auto svg = c.out_dir / "chain_run.svg";
    write_text(svg, trajectory_svg(steps));
    summary.outputs.push_back(svg);
  }

  summary.headline["steps"] = c.steps;
  summary.headline["regenerations"] = returns.size();
  summary.headline["first_return_step"] = returns.empty() ? json(nullptr) : json(returns.front());
  summary.checks.push_back({"state_structure", violation.empty(), violation.empty() ? "all states valid" : violation});
  if (c.force_origin) {
    bool same = true;
    for (const auto& s : steps) {
      same = same && s.state.body.size() == steps.front().state.body.size();
      for (std::size_t i = 0; same && i < s.state.body.balls().size(); ++i) {
        const auto& a = s.state.body.balls()[i];
        const auto& b = steps.front().state.body.balls()[i];
        same = a.center == b.center && a.radius == b.radius;
      }
    }
    summary.checks.push_back({"forced_origin_fixed_point", same, "every state equals the initial state"});
  }
  summary.wall_time_s = timer.elapsed();
  return summary;
}

RunSummary cmd_regen_stats(const ExperimentConfig& c) {
  const Timer timer;
  auto summary = start("regen-stats", c);
  if (c.body.kind != BodySpec::Kind::UnitBall) throw UsageError("body.kind: regen-stats starts from the unit ball");
  const auto space = c.space();
  const std::size_t d = space.dim();
  Rng rng = Rng::stream(summary.seed, kTagRegen, 0);
  Rng certify_rng = Rng::stream(summary.seed, kTagCertify, 0);

  RegenOptions opts;
  opts.n_blocks = c.blocks;
  opts.step_budget = c.step_budget;
  opts.volume_samples = c.volume_samples;
  opts.reciprocal_repetitions = c.reciprocal_repetitions;
  std::string violation;
  std::uint64_t states_checked = 0;
  std::map<std::size_t, std::uint64_t> certified_hist;
  opts.observer = [&](const ChainState& s) {
    ++states_checked;
    if (violation.empty()) violation = state_violation(s);
    if (s.last_regen_step && *s.last_regen_step <= s.step) {
      const auto exps = radius_exponents(s.body, s.tau);
      if (violation.empty() && exps && !exps->empty() &&
          static_cast<std::uint64_t>(*std::max_element(exps->begin(), exps->end())) > s.step - *s.last_regen_step)
        violation = "step " + std::to_string(s.step) + ": radius older than the last regeneration";
    }
    ++certified_hist[certified_constraint_count(s.body, 256, certify_rng)];
  };

  RegenStats stats;
  bool within_budget = true;
  try {
    stats = run_regenerations(space, c.tau, rng, opts);
  } catch (const StepBudgetExceeded& e) {
    within_budget = false;
    stats = e.partial();
  }

  CsvWriter rt(c.out_dir / "regen_return_times.csv", "regen-stats", c, {"return_time", "count"});
  std::map<std::uint64_t, std::uint64_t> hist;
  for (auto t : stats.return_times) ++hist[t];
  for (auto [t, n] : hist) rt.row({cell(t), cell(n)});
  summary.outputs.push_back(rt.path());

  CsvWriter bc(c.out_dir / "regen_ball_counts.csv", "regen-stats", c,
               {"ball_count", "pairwise_pruned_states", "certified_states"});
  std::set<std::size_t> keys;
  for (auto [k, n] : stats.ball_count_histogram) keys.insert(k);
  for (auto [k, n] : certified_hist) keys.insert(k);
  for (auto k : keys) {
    const auto a = stats.ball_count_histogram.count(k) ? stats.ball_count_histogram.at(k) : 0;
    const auto b = certified_hist.count(k) ? certified_hist.at(k) : 0;
    bc.row({cell(static_cast<std::uint64_t>(k)), cell(a), cell(b)});
  }
  summary.outputs.push_back(bc.path());

  const std::size_t blocks = stats.blocks();
  std::vector<double> times(stats.return_times.begin(), stats.return_times.end());
  const auto rt_summary = summarize(times);
  const double p_target = std::pow(1.0 - c.tau, static_cast<double>(d));
  const double ones = static_cast<double>(std::count(stats.return_times.begin(), stats.return_times.end(), 1u));
  const double p_hat = blocks ? ones / static_cast<double>(blocks) : 0.0;
  const double p_sigma = blocks ? std::sqrt(p_target * (1 - p_target) / static_cast<double>(blocks)) : 0.0;
  const double floor = std::ldexp(1.0, -static_cast<int>(d) - 1);

  CsvWriter fn(c.out_dir / "regen_functionals.csv", "regen-stats", c, {"functional", "estimate", "stderr"});
  json estimates = json::object();
  if (blocks >= 2) {
    for (Functional f : opts.functionals) {
      const auto e = stationary_estimate(stats, f);
      fn.row({std::string(to_string(f)), cell(e.value), cell(e.std_error)});
      estimates[std::string(to_string(f))] = json{{"estimate", e.value}, {"stderr", e.std_error}};
    }
  }
  summary.outputs.push_back(fn.path());

  summary.headline["blocks"] = blocks;
  summary.headline["total_steps"] = stats.total_steps;
  summary.headline["mean_return_time"] = rt_summary.mean;
  summary.headline["mean_return_time_stderr"] = rt_summary.std_error;
  summary.headline["one_step_return_frequency"] = p_hat;
  summary.headline["one_step_return_target"] = p_target;
  summary.headline["min_inscribed_radius"] = stats.min_inscribed_radius;
  summary.headline["inscribed_radius_floor"] = floor;
  summary.headline["max_ball_count"] = stats.ball_count_histogram.empty() ? 0 : stats.ball_count_histogram.rbegin()->first;
  summary.headline["stationary_estimates"] = estimates;

  summary.checks.push_back({"blocks_within_budget", within_budget,
                            std::to_string(blocks) + " blocks in " + std::to_string(stats.total_steps) + " steps"});
  const bool positive = std::all_of(stats.return_times.begin(), stats.return_times.end(), [](auto t) { return t >= 1; });
  summary.checks.push_back({"return_times_positive", positive, ""});
  summary.checks.push_back({"one_step_return_probability", std::abs(p_hat - p_target) <= 3.0 * p_sigma,
                            "freq " + str(p_hat) + " vs " + str(p_target) + " (3 sigma = " + str(3 * p_sigma) + ")"});
  summary.checks.push_back({"inscribed_radius_floor", stats.min_inscribed_radius >= floor - 1e-6,
                            "min " + str(stats.min_inscribed_radius) + " vs " + str(floor)});
  summary.checks.push_back({"state_structure", violation.empty(),
                            violation.empty() ? std::to_string(states_checked) + " states valid" : violation});

  if (blocks >= 4) {
    const std::size_t half = blocks / 2;
    const double m1 = kahan_mean(std::span<const double>(times).first(half));
    const double m2 = kahan_mean(std::span<const double>(times).subspan(half, half));
    const double rel = std::abs(m1 - m2) / (0.5 * (m1 + m2));
    summary.headline["half_means"] = json::array({m1, m2});
    summary.checks.push_back({"halves_agree", rel <= 0.10, "relative difference " + str(rel)});

    // Log-survival beyond the median, over points with at least 5 exceedances.
    auto sorted = stats.return_times;
    std::sort(sorted.begin(), sorted.end());
    const auto median = sorted[sorted.size() / 2];
    std::vector<double> xs, ys;
    for (std::uint64_t t = median; t < sorted.back(); ++t) {
      const auto above = static_cast<double>(sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), t));
      if (above < 5) break;
      xs.push_back(static_cast<double>(t));
      ys.push_back(std::log(above / static_cast<double>(sorted.size())));
    }
    const double slope = xs.size() >= 2 ? ols_slope(xs, ys) : std::nan("");
    summary.headline["log_survival_slope"] = slope;
    summary.checks.push_back({"log_survival_slope_negative", slope < 0, "slope " + str(slope)});
  } else {
    summary.checks.push_back({"halves_agree", false, "fewer than 4 blocks"});
  }
  summary.wall_time_s = timer.elapsed();
  return summary;
}

RunSummary cmd_lln(const ExperimentConfig& c) {
  const Timer timer;
  auto summary = start("lln", c);
  const auto rows = lln_table(c.lln_ns, c.replicas_or(200), c.space(), c.tau, c.body, summary.seed);
  CsvWriter csv(c.out_dir / "lln.csv", "lln", c, {"n", "replicas", "mean_ratio", "stderr", "target"});
  json table = json::array();
  for (const auto& r : rows) {
    csv.row({cell(r.n), cell(r.replicas), cell(r.mean_ratio), cell(r.std_error), cell(r.target)});
    table.push_back(json{{"n", r.n}, {"mean_ratio", r.mean_ratio}, {"stderr", r.std_error}});
  }
  summary.outputs.push_back(csv.path());
  const bool monotone = lln_monotone_toward_target(rows);
  const auto& last = rows.back();
  const double rel = std::abs(last.mean_ratio - last.target) / last.target;
  summary.headline["target"] = last.target;
  summary.headline["rows"] = table;
  summary.headline["monotone_toward_target"] = monotone;
  summary.checks.push_back({"monotone_toward_target", monotone, ""});
  summary.checks.push_back({"final_within_tolerance", rel <= c.lln_rel_tol,
                            "relative error " + str(rel) + " at n = " + std::to_string(last.n)});
  summary.wall_time_s = timer.elapsed();
  return summary;
}

RunSummary cmd_duality(const ExperimentConfig& c) {
  const Timer timer;
  auto summary = start("duality", c);
  const auto replicas = c.replicas_or(2000);
  const auto cmp = compare_duality(c.duality_n, replicas, c.space(), c.tau, c.body, summary.seed);
  CsvWriter csv(c.out_dir / "duality.csv", "duality", c, {"replica", "direct", "duality"});
  for (std::size_t i = 0; i < cmp.direct.size(); ++i)
    csv.row({cell(static_cast<std::uint64_t>(i)), cell(cmp.direct[i]), cell(cmp.duality[i])});
  summary.outputs.push_back(csv.path());
  summary.headline["n"] = c.duality_n;
  summary.headline["replicas"] = replicas;
  summary.headline["mean_direct"] = kahan_mean(cmp.direct);
  summary.headline["mean_duality"] = kahan_mean(cmp.duality);
  summary.headline["ks_statistic"] = cmp.ks.statistic;
  summary.headline["ks_p_value"] = cmp.ks.p_value;
  summary.checks.push_back({"ks_p_value_above_alpha", cmp.ks.p_value > c.alpha,
                            "p = " + str(cmp.ks.p_value) + ", alpha = " + str(c.alpha)});
  summary.wall_time_s = timer.elapsed();
  return summary;
}

RunSummary cmd_nn_bench(const ExperimentConfig& c) {
  const Timer timer;
  auto summary = start("nn-bench", c);
  const auto space = c.space();
  const std::size_t d = space.dim();
  Rng rng = Rng::stream(summary.seed, kTagNnBench, 0);
  const auto points = sample_body(space, c.body, c.nn_points, rng);
  VpTree tree(space, c.tau);
  for (const auto& p : points) tree.insert(p);
  // Queries cover the body and a margin around it.
  const double reach = 1.25 * (c.body.kind == BodySpec::Kind::Cube ? c.body.half_width : 1.0);
  std::vector<Point> queries;
  for (std::uint64_t q = 0; q < c.nn_queries; ++q) {
    Point x(d);
    for (std::size_t i = 0; i < d; ++i) x[i] = rng.uniform(-reach, reach);
    queries.push_back(x);
  }

  std::vector<NnResult> fast(queries.size()), slow(queries.size());
  const auto t0 = Clock::now();
  for (std::size_t q = 0; q < queries.size(); ++q) fast[q] = tree.nearest(queries[q]);
  const double tree_s = seconds_since(t0);
  const auto t1 = Clock::now();
  for (std::size_t q = 0; q < queries.size(); ++q) slow[q] = linear_scan_nearest(points, space, queries[q]);
  const double brute_s = seconds_since(t1);

  CsvWriter csv(c.out_dir / "nn_bench.csv", "nn-bench", c,
                {"query", "tree_index", "brute_index", "distance", "visited", "match"});
  std::uint64_t mismatches = 0;
  double visited = 0;
  for (std::size_t q = 0; q < queries.size(); ++q) {
    const bool match = fast[q].index == slow[q].index && fast[q].distance == slow[q].distance;
    mismatches += match ? 0 : 1;
    visited += static_cast<double>(fast[q].visited);
    csv.row({cell(static_cast<std::uint64_t>(q)), cell(static_cast<std::uint64_t>(fast[q].index)),
             cell(static_cast<std::uint64_t>(slow[q].index)), cell(fast[q].distance),
             cell(static_cast<std::uint64_t>(fast[q].visited)), cell(match)});
  }
  summary.outputs.push_back(csv.path());

  // Timings vary run to run, so they live apart from the reproducible table.
  CsvWriter timing(c.out_dir / "nn_bench_timing.csv", "nn-bench", c, {"method", "seconds", "queries"});
  timing.row({"vp_tree", cell(tree_s), cell(c.nn_queries)});
  timing.row({"linear_scan", cell(brute_s), cell(c.nn_queries)});
  summary.outputs.push_back(timing.path());

  const double nq = std::max<double>(1.0, static_cast<double>(queries.size()));
  summary.headline["points"] = c.nn_points;
  summary.headline["queries"] = c.nn_queries;
  summary.headline["mismatches"] = mismatches;
  summary.headline["mean_visited"] = visited / nq;
  summary.headline["tree_height"] = tree.height();
  summary.headline["tree_seconds"] = tree_s;
  summary.headline["linear_scan_seconds"] = brute_s;
  summary.checks.push_back({"exact_match", mismatches == 0, std::to_string(mismatches) + " mismatches"});
  summary.wall_time_s = timer.elapsed();
  return summary;
}

RunSummary cmd_height_ratio(const ExperimentConfig& c) {
  const Timer timer;
  auto summary = start("height-ratio", c);
  const auto rows = height_ratio_experiment(c.height_ns, c.replicas_or(200), c.space(), c.tau, c.body, summary.seed);
  CsvWriter csv(c.out_dir / "height_ratio.csv", "height-ratio", c, {"n", "mean_ratio", "stderr", "used", "excluded"});
  json table = json::array();
  bool sane = true;
  for (const auto& r : rows) {
    csv.row({cell(r.n), cell(r.mean_ratio), cell(r.std_error), cell(r.used), cell(r.excluded)});
    table.push_back(json{{"n", r.n}, {"mean_ratio", r.mean_ratio}, {"used", r.used}});
    if (r.used > 0) sane = sane && std::isfinite(r.mean_ratio) && r.mean_ratio >= 1.0;
  }
  summary.outputs.push_back(csv.path());
  summary.headline["rows"] = table;
  summary.checks.push_back({"ratio_at_least_one", sane, "H_n >= L_n on every replica with L_n >= 1"});
  summary.wall_time_s = timer.elapsed();
  return summary;
}

RunSummary cmd_theorem2(const ExperimentConfig& c) {
  const Timer timer;
  auto summary = start("theorem2", c);
  Theorem2Options opts;
  opts.replicas = c.replicas_or(2000);
  opts.tol = c.tol;
  opts.warmup = c.warmup;
  const auto grid = theorem2_grid(c.xs, c.ss, c.theorem2_n, c.space(), c.tau, c.body, summary.seed, opts);
  CsvWriter csv(c.out_dir / "theorem2.csv", "theorem2", c,
                {"x", "s", "n", "lhs", "lhs_ci_lo", "lhs_ci_hi", "rhs", "rhs_ci_lo", "rhs_ci_hi", "overlap",
                 "rhs_shifted", "rhs_shifted_ci_lo", "rhs_shifted_ci_hi", "overlap_shifted"});
  std::size_t overlaps = 0;
  std::size_t shifted = 0;
  json table = json::array();
  for (const auto& p : grid) {
    csv.row({cell(p.x), cell(p.s), cell(p.n), cell(p.lhs), cell(p.lhs_ci.lo), cell(p.lhs_ci.hi), cell(p.rhs),
             cell(p.rhs_ci.lo), cell(p.rhs_ci.hi), cell(p.overlap), cell(p.rhs_shifted), cell(p.rhs_shifted_ci.lo),
             cell(p.rhs_shifted_ci.hi), cell(p.overlap_shifted)});
    overlaps += p.overlap ? 1 : 0;
    shifted += p.overlap_shifted ? 1 : 0;
    table.push_back(json{{"x", p.x},
                         {"s", p.s},
                         {"lhs", p.lhs},
                         {"rhs", p.rhs},
                         {"overlap", p.overlap},
                         {"rhs_shifted", p.rhs_shifted},
                         {"overlap_shifted", p.overlap_shifted}});
  }
  summary.outputs.push_back(csv.path());
  summary.headline["replicas"] = opts.replicas;
  summary.headline["grid"] = table;
  const auto of = [&](std::size_t k) { return std::to_string(k) + " of " + std::to_string(grid.size()) + " overlap"; };
  summary.checks.push_back({"all_intervals_overlap", overlaps == grid.size(), of(overlaps)});
  summary.checks.push_back({"all_intervals_overlap_shifted", shifted == grid.size(), of(shifted)});
  summary.wall_time_s = timer.elapsed();
  return summary;
}

RunSummary run_command(std::string_view name, const ExperimentConfig& config) {
  validate(config);
  config.require_seed();
  std::filesystem::create_directories(config.out_dir);
  if (name == "chain-run") return cmd_chain_run(config);
  if (name == "regen-stats") return cmd_regen_stats(config);
  if (name == "lln") return cmd_lln(config);
  if (name == "duality") return cmd_duality(config);
  if (name == "nn-bench") return cmd_nn_bench(config);
  if (name == "height-ratio") return cmd_height_ratio(config);
  if (name == "theorem2") return cmd_theorem2(config);
  throw UsageError("subcommand: unknown '" + std::string(name) + "'");
}

}  // namespace vpchain::cli
