#include "vpchain/geometry.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>

namespace vpchain {

namespace {

constexpr std::size_t kBoxProposal = std::numeric_limits<std::size_t>::max();

bool within(double lhs, double rhs, double tol) { return lhs <= rhs + tol * (1.0 + std::abs(rhs)); }

double linf_distance(const Point& a, const Point& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

std::string_view to_string(NormKind kind) {
  switch (kind) {
    case NormKind::L1: return "l1";
    case NormKind::L2: return "l2";
    case NormKind::Linf: return "linf";
  }
  return "?";
}

NormKind parse_norm_kind(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "l1") return NormKind::L1;
  if (lower == "l2") return NormKind::L2;
  if (lower == "linf" || lower == "l_inf" || lower == "inf") return NormKind::Linf;
  throw UsageError("norm: expected one of l1, l2, linf but got '" + std::string(text) + "'");
}

NormedSpace::NormedSpace(std::size_t dim, NormKind kind) : dim_(dim), kind_(kind) {
  if (dim < 1 || dim > kMaxDim) throw UsageError("dim: must be in [1, " + std::to_string(kMaxDim) + "]");
}

void NormedSpace::check_dim(const Point& x) const {
  if (x.dim() != dim_) {
    throw UsageError("dimension mismatch: point has dim " + std::to_string(x.dim()) + ", space has dim " +
                     std::to_string(dim_));
  }
}

double NormedSpace::norm(const Point& x) const {
  check_dim(x);
  double acc = 0.0;
  switch (kind_) {
    case NormKind::L1:
      for (std::size_t i = 0; i < dim_; ++i) acc += std::abs(x[i]);
      return acc;
    case NormKind::L2:
      if (dim_ == 1) return std::abs(x[0]);
      if (dim_ == 2) return std::hypot(x[0], x[1]);
      for (std::size_t i = 0; i < dim_; ++i) acc += x[i] * x[i];
      return std::sqrt(acc);
    case NormKind::Linf:
      for (std::size_t i = 0; i < dim_; ++i) acc = std::max(acc, std::abs(x[i]));
      return acc;
  }
  return acc;
}

Point NormedSpace::norm_subgradient(const Point& x) const {
  check_dim(x);
  Point g(dim_);
  switch (kind_) {
    case NormKind::L1:
      for (std::size_t i = 0; i < dim_; ++i) g[i] = x[i] > 0 ? 1.0 : (x[i] < 0 ? -1.0 : 0.0);
      break;
    case NormKind::L2: {
      const double n = norm(x);
      if (n > 0) g = x / n;
      break;
    }
    case NormKind::Linf: {
      std::size_t arg = 0;
      for (std::size_t i = 1; i < dim_; ++i)
        if (std::abs(x[i]) > std::abs(x[arg])) arg = i;
      g[arg] = x[arg] > 0 ? 1.0 : (x[arg] < 0 ? -1.0 : 0.0);
      break;
    }
  }
  return g;
}

double NormedSpace::unit_ball_volume() const {
  const auto d = static_cast<double>(dim_);
  switch (kind_) {
    case NormKind::L1: return std::pow(2.0, d) / std::tgamma(d + 1.0);
    case NormKind::L2: return std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0 + 1.0);
    case NormKind::Linf: return std::pow(2.0, d);
  }
  return 0.0;
}

double NormedSpace::ball_volume(double radius) const {
  return unit_ball_volume() * std::pow(radius, static_cast<double>(dim_));
}

Point NormedSpace::sample_unit_ball(Rng& rng) const {
  Point x(dim_);
  const double inv_d = 1.0 / static_cast<double>(dim_);
  switch (kind_) {
    case NormKind::Linf:
      for (std::size_t i = 0; i < dim_; ++i) x[i] = rng.uniform(-1.0, 1.0);
      break;
    case NormKind::L2: {
      double n2 = 0.0;
      do {
        n2 = 0.0;
        for (std::size_t i = 0; i < dim_; ++i) {
          x[i] = rng.normal();
          n2 += x[i] * x[i];
        }
      } while (n2 == 0.0);
      x *= std::pow(rng.uniform(), inv_d) / std::sqrt(n2);
      break;
    }
    case NormKind::L1: {
      // Normalized exponentials are uniform on the face of the simplex.
      double sum = 0.0;
      for (std::size_t i = 0; i < dim_; ++i) {
        x[i] = rng.exponential(1.0);
        sum += x[i];
      }
      const double radial = std::pow(rng.uniform(), inv_d) / sum;
      for (std::size_t i = 0; i < dim_; ++i) x[i] *= rng.coin() ? radial : -radial;
      break;
    }
  }
  return x;
}

bool ball_contains_ball(const NormedSpace& space, const Ball& inner, const Ball& outer, double tol) {
  return within(space.distance(inner.center, outer.center), outer.radius - inner.radius, tol);
}

// All three unit balls have coordinate extent exactly 1.
bool box_contains_ball(const NormedSpace& space, const Ball& inner, const Box& outer, double tol) {
  space.check_dim(inner.center);
  return within(linf_distance(inner.center, outer.center) + inner.radius, outer.half_width, tol);
}

// These norms are monotone in |x_i|, so the farthest box point is the vertex
// maximizing every coordinate offset.
bool ball_contains_box(const NormedSpace& space, const Box& inner, const Ball& outer, double tol) {
  Point far(space.dim());
  for (std::size_t i = 0; i < space.dim(); ++i)
    far[i] = std::abs(inner.center[i] - outer.center[i]) + inner.half_width;
  return within(space.norm(far), outer.radius, tol);
}

BallIntersection::BallIntersection(NormedSpace space, std::vector<Ball> balls, std::optional<Box> box)
    : space_(space), balls_(std::move(balls)), box_(std::move(box)) {
  if (balls_.empty() && !box_) throw UsageError("BallIntersection: needs at least one ball or a box");
  for (const auto& b : balls_) {
    space_.check_dim(b.center);
    if (!(b.radius >= 0)) throw UsageError("BallIntersection: negative radius");
  }
  if (box_) {
    space_.check_dim(box_->center);
    if (!(box_->half_width >= 0)) throw UsageError("BallIntersection: negative box half-width");
  }
  double best = std::numeric_limits<double>::infinity();
  proposal_ = kBoxProposal;
  for (std::size_t i = 0; i < balls_.size(); ++i) {
    if (balls_[i].radius < best) {
      best = balls_[i].radius;
      proposal_ = i;
    }
  }
  if (box_ && (proposal_ == kBoxProposal ||
               std::pow(2.0 * box_->half_width, static_cast<double>(space_.dim())) < space_.ball_volume(best))) {
    proposal_ = kBoxProposal;
  }
}

BallIntersection BallIntersection::unit_ball(const NormedSpace& space) {
  return BallIntersection(space, {Ball{Point::zero(space.dim()), 1.0}});
}

BallIntersection BallIntersection::cube(const NormedSpace& space, double half_width) {
  if (!(half_width > 0)) throw UsageError("half_width: must be positive");
  return BallIntersection(space, {}, Box{Point::zero(space.dim()), half_width});
}

bool BallIntersection::contains(const Point& x, double tol) const {
  for (const auto& b : balls_)
    if (!within(space_.distance(x, b.center), b.radius, tol)) return false;
  if (box_ && !within(linf_distance(x, box_->center), box_->half_width, tol)) return false;
  return true;
}

BallIntersection BallIntersection::transformed(const Point& shift, double scale) const {
  std::vector<Ball> balls;
  balls.reserve(balls_.size() + 1);
  for (const auto& b : balls_) balls.push_back({(b.center - shift) / scale, b.radius / scale});
  std::optional<Box> box;
  if (box_) box = Box{(box_->center - shift) / scale, box_->half_width / scale};
  return BallIntersection(space_, std::move(balls), std::move(box));
}

BallIntersection BallIntersection::with_ball(Ball ball) const {
  auto balls = balls_;
  balls.push_back(std::move(ball));
  return BallIntersection(space_, std::move(balls), box_);
}

double BallIntersection::proposal_volume() const {
  if (proposal_ == kBoxProposal) return std::pow(2.0 * box_->half_width, static_cast<double>(space_.dim()));
  return space_.ball_volume(balls_[proposal_].radius);
}

Point BallIntersection::sample_proposal(Rng& rng) const {
  if (proposal_ == kBoxProposal) {
    Point x(space_.dim());
    for (std::size_t i = 0; i < space_.dim(); ++i)
      x[i] = box_->center[i] + box_->half_width * rng.uniform(-1.0, 1.0);
    return x;
  }
  const auto& b = balls_[proposal_];
  return b.center + b.radius * space_.sample_unit_ball(rng);
}

bool polyhedron_contains(const BallIntersection& set, const Point& x) { return set.contains(x); }

BallIntersection prune(const BallIntersection& set) {
  const auto& space = set.space();
  const auto& balls = set.balls();
  const std::size_t n = balls.size();

  bool drop_box = false;
  if (set.box()) {
    for (const auto& b : balls) {
      if (box_contains_ball(space, b, *set.box())) {
        drop_box = true;
        break;
      }
    }
  }

  std::vector<Ball> kept;
  kept.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    bool drop = set.box() && !drop_box && ball_contains_box(space, *set.box(), balls[i]);
    for (std::size_t j = 0; j < n && !drop; ++j) {
      if (j == i || !ball_contains_ball(space, balls[j], balls[i])) continue;
      // Equal balls: keep the earliest.
      drop = j < i || !ball_contains_ball(space, balls[i], balls[j]);
    }
    if (!drop) kept.push_back(balls[i]);
  }
  std::optional<Box> box;
  if (set.box() && !drop_box) box = set.box();
  return BallIntersection(space, std::move(kept), std::move(box));
}

Point sample_uniform_unit_ball(const NormedSpace& space, Rng& rng) { return space.sample_unit_ball(rng); }

Point sample_uniform(const BallIntersection& set, Rng& rng, std::uint64_t max_trials) {
  for (std::uint64_t t = 0; t < max_trials; ++t) {
    Point x = set.sample_proposal(rng);
    if (set.contains(x, 0.0)) return x;
  }
  throw DegenerateSetError("sample_uniform: no accepted point after " + std::to_string(max_trials) + " trials");
}

bool acceptance_trial(const BallIntersection& set, Rng& rng) { return set.contains(set.sample_proposal(rng), 0.0); }

VolumeEstimate volume_estimate(const BallIntersection& set, std::uint64_t n_samples, Rng& rng) {
  if (n_samples < 1) throw UsageError("n_samples: must be >= 1");
  std::uint64_t hits = 0;
  for (std::uint64_t i = 0; i < n_samples; ++i) hits += acceptance_trial(set, rng) ? 1 : 0;
  const double n = static_cast<double>(n_samples);
  const double q = static_cast<double>(hits) / n;
  const double v = set.proposal_volume();
  return {q * v, v * std::sqrt(q * (1.0 - q) / n)};
}

double reciprocal_volume_sample(const BallIntersection& set, std::uint64_t repetitions, Rng& rng) {
  if (repetitions < 1) throw UsageError("repetitions: must be >= 1");
  std::uint64_t trials = 0;
  for (std::uint64_t r = 0; r < repetitions; ++r) {
    std::uint64_t t = 0;
    do {
      if (++t > kDefaultRejectionBudget) throw DegenerateSetError("reciprocal_volume_sample: degenerate set");
    } while (!acceptance_trial(set, rng));
    trials += t;
  }
  return static_cast<double>(trials) / static_cast<double>(repetitions) / set.proposal_volume();
}

namespace {

// Value and subgradient of x -> max_i (|x - c_i| - r_i), box term included.
struct MaxGap {
  const BallIntersection& set;

  double value(const Point& x) const {
    const auto& space = set.space();
    double f = -std::numeric_limits<double>::infinity();
    for (const auto& b : set.balls()) f = std::max(f, space.distance(x, b.center) - b.radius);
    if (set.box()) f = std::max(f, linf_distance(x, set.box()->center) - set.box()->half_width);
    return f;
  }

  Point subgradient(const Point& x) const {
    const auto& space = set.space();
    double f = -std::numeric_limits<double>::infinity();
    Point g(space.dim());
    for (const auto& b : set.balls()) {
      const double v = space.distance(x, b.center) - b.radius;
      if (v > f) {
        f = v;
        g = space.norm_subgradient(x - b.center);
      }
    }
    if (set.box()) {
      const double v = linf_distance(x, set.box()->center) - set.box()->half_width;
      if (v > f) g = NormedSpace(space.dim(), NormKind::Linf).norm_subgradient(x - set.box()->center);
    }
    return g;
  }
};

double l2(const Point& g) {
  double s = 0.0;
  for (double v : g.coords()) s += v * v;
  return std::sqrt(s);
}

}  // namespace

InscribedBall inscribed_radius(const BallIntersection& set, const InscribedOptions& options) {
  const MaxGap objective{set};
  Point best = Point::zero(set.space().dim());
  double best_f = objective.value(best);
  double scale = options.step_scale;
  std::uint64_t iterations = 0;

  for (;;) {
    const double stage_start = best_f;
    Point x = best;
    bool stationary = false;
    for (std::uint64_t k = 1; k <= options.stage_length; ++k) {
      const Point g = objective.subgradient(x);
      const double gn = l2(g);
      if (gn == 0.0) {
        // x minimizes the active term, hence the maximum.
        stationary = true;
        break;
      }
      x -= g * (scale / (static_cast<double>(k) * gn));
      const double f = objective.value(x);
      if (f < best_f) {
        best_f = f;
        best = x;
      }
      if (++iterations >= options.max_iterations) {
        throw NumericalError("inscribed_radius: iteration cap reached", -best_f, best);
      }
    }
    if (stationary) break;
    if (stage_start - best_f < options.tol) {
      if (scale <= options.tol) break;
      scale *= 0.1;
    }
  }
  return {std::max(0.0, -best_f), best, iterations};
}

std::size_t certified_constraint_count(const BallIntersection& set, std::uint64_t samples, Rng& rng) {
  const auto& balls = set.balls();
  std::size_t certified = 0;
  auto certify = [&](const BallIntersection& others, auto&& outside) {
    for (std::uint64_t s = 0; s < samples; ++s) {
      Point x = others.sample_proposal(rng);
      if (others.contains(x, 0.0) && outside(x)) return true;
    }
    return false;
  };
  for (std::size_t j = 0; j < balls.size(); ++j) {
    std::vector<Ball> rest;
    for (std::size_t i = 0; i < balls.size(); ++i)
      if (i != j) rest.push_back(balls[i]);
    if (rest.empty() && !set.box()) {
      ++certified;
      continue;
    }
    const BallIntersection others(set.space(), std::move(rest), set.box());
    const Ball& b = balls[j];
    if (certify(others, [&](const Point& x) { return set.space().distance(x, b.center) > b.radius; })) ++certified;
  }
  if (set.box()) {
    if (balls.empty()) return 1;
    const BallIntersection others(set.space(), balls);
    const Box& box = *set.box();
    if (certify(others, [&](const Point& x) { return linf_distance(x, box.center) > box.half_width; })) ++certified;
  }
  return certified;
}

}  // namespace vpchain
