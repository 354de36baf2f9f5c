#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vpchain/errors.hpp"
#include "vpchain/point.hpp"
#include "vpchain/rng.hpp"

namespace vpchain {

/// Relative tolerance for containment comparisons. Ties count as containment.
inline constexpr double kContainmentTol = 1e-9;

enum class NormKind { L1, L2, Linf };

std::string_view to_string(NormKind kind);
/// Parses "l1" / "l2" / "linf" (case-insensitive). Throws UsageError.
NormKind parse_norm_kind(std::string_view text);

/// R^d with one of the l1, l2, l-infinity norms.
class NormedSpace {
 public:
  NormedSpace(std::size_t dim, NormKind kind);

  std::size_t dim() const { return dim_; }
  NormKind kind() const { return kind_; }

  /// Throws UsageError on dimension mismatch.
  double norm(const Point& x) const;
  double distance(const Point& a, const Point& b) const { return norm(a - b); }

  /// A subgradient of the norm at x (a unit vector in the dual norm).
  Point norm_subgradient(const Point& x) const;

  /// Lebesgue measure of the closed unit ball.
  double unit_ball_volume() const;
  double ball_volume(double radius) const;

  /// Exact uniform draw on the closed unit ball B_1(0).
  Point sample_unit_ball(Rng& rng) const;

  void check_dim(const Point& x) const;

  friend bool operator==(const NormedSpace&, const NormedSpace&) = default;

 private:
  std::size_t dim_;
  NormKind kind_;
};

struct Ball {
  Point center;
  double radius = 0.0;
};

/// Axis-aligned cube {x : max_i |x_i - center_i| <= half_width}.
struct Box {
  Point center;
  double half_width = 0.0;
};

/// True iff inner is a subset of outer: |c_in - c_out| <= r_out - r_in.
bool ball_contains_ball(const NormedSpace& space, const Ball& inner, const Ball& outer,
                        double tol = kContainmentTol);
bool box_contains_ball(const NormedSpace& space, const Ball& inner, const Box& outer,
                       double tol = kContainmentTol);
bool ball_contains_box(const NormedSpace& space, const Box& inner, const Ball& outer,
                       double tol = kContainmentTol);

/// Intersection of finitely many closed balls, optionally with one
/// axis-aligned box (the image of a box-shaped initial body K).
class BallIntersection {
 public:
  BallIntersection(NormedSpace space, std::vector<Ball> balls, std::optional<Box> box = std::nullopt);

  static BallIntersection unit_ball(const NormedSpace& space);
  static BallIntersection cube(const NormedSpace& space, double half_width);

  const NormedSpace& space() const { return space_; }
  const std::vector<Ball>& balls() const { return balls_; }
  const std::optional<Box>& box() const { return box_; }
  /// Number of constraints (balls plus the box, if any).
  std::size_t size() const { return balls_.size() + (box_ ? 1 : 0); }

  /// x lies in every ball and in the box, up to a relative tolerance.
  bool contains(const Point& x, double tol = kContainmentTol) const;

  /// Maps the set through x -> (x - shift) / scale.
  BallIntersection transformed(const Point& shift, double scale) const;
  BallIntersection with_ball(Ball ball) const;

  /// The constraint of least volume; it bounds the set and is the rejection
  /// proposal for sample_uniform.
  double proposal_volume() const;
  Point sample_proposal(Rng& rng) const;

 private:
  NormedSpace space_;
  std::vector<Ball> balls_;
  std::optional<Box> box_;
  // Index into balls_ of the smallest ball, or npos when the box is smaller.
  std::size_t proposal_ = 0;
};

bool polyhedron_contains(const BallIntersection& set, const Point& x);

/// Removes every ball (or the box) containing another constraint of the set.
/// Survivors keep their relative order; the set itself is unchanged. For
/// mutually contained (equal) constraints the earliest one survives.
BallIntersection prune(const BallIntersection& set);

Point sample_uniform_unit_ball(const NormedSpace& space, Rng& rng);

inline constexpr std::uint64_t kDefaultRejectionBudget = 1'000'000;

/// Uniform point of the set by rejection from its proposal constraint.
/// Throws DegenerateSetError when the budget is exhausted.
Point sample_uniform(const BallIntersection& set, Rng& rng,
                     std::uint64_t max_trials = kDefaultRejectionBudget);

/// One proposal draw tested for membership: a Bernoulli variable with success
/// probability volume(set) / proposal_volume(set).
bool acceptance_trial(const BallIntersection& set, Rng& rng);

struct VolumeEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
};

/// Hit-or-miss estimate of the Lebesgue measure of the set.
VolumeEstimate volume_estimate(const BallIntersection& set, std::uint64_t n_samples, Rng& rng);

/// Unbiased estimate of 1 / volume(set): mean number of proposal draws until
/// acceptance, divided by the proposal volume.
double reciprocal_volume_sample(const BallIntersection& set, std::uint64_t repetitions, Rng& rng);

struct InscribedOptions {
  double step_scale = 0.5;
  std::uint64_t max_iterations = 100'000;
  double tol = 1e-7;
  std::uint64_t stage_length = 400;
};

struct InscribedBall {
  double radius = 0.0;
  Point center;
  std::uint64_t iterations = 0;
};

/// Largest r with B_r(x) inside the set for some x, by minimizing the convex
/// function max_i (|x - c_i| - r_i) with restarted subgradient steps
/// scale / k. Starts from the origin. Throws NumericalError (carrying the
/// best iterate) if the iteration cap is hit first.
InscribedBall inscribed_radius(const BallIntersection& set, const InscribedOptions& options = {});

/// Number of constraints for which a sampled witness point lies in all other
/// constraints but outside this one. A lower bound on the size of a minimal
/// representation; the pruned size is an upper bound.
std::size_t certified_constraint_count(const BallIntersection& set, std::uint64_t samples, Rng& rng);

}  // namespace vpchain
