#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "vpchain/chain.hpp"
#include "vpchain/geometry.hpp"

namespace vpchain {

struct VpNode {
  Point point;
  double threshold = 0.0;  // tau^(depth + 1)
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::uint32_t depth = 0;
};

struct InsertResult {
  std::size_t index = 0;  // insertion index, 0-based
  bool extends_leftmost = false;
};

struct NnResult {
  std::size_t index = 0;
  Point point;
  double distance = 0.0;
  std::size_t visited = 0;  // distance evaluations
};

/// Vantage-point tree with exponential thresholds tau^(depth+1), built by
/// sequential insertion. Points at distance exactly r_y from a vantage point
/// y go left (closed balls).
class VpTree {
 public:
  VpTree(NormedSpace space, double tau);

  InsertResult insert(const Point& x);

  const NormedSpace& space() const { return space_; }
  double tau() const { return tau_; }
  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }
  const VpNode& node(std::size_t i) const { return nodes_[i]; }
  std::span<const VpNode> nodes() const { return nodes_; }

  /// Edges on the root-to-leaf path that always goes left.
  std::size_t leftmost_path_length() const;
  /// Edges on the longest root-to-leaf path.
  std::size_t height() const { return height_; }
  /// Node indices along the leftmost path, root first.
  std::vector<std::size_t> leftmost_path() const;

  /// Exact nearest neighbor; ties go to the smaller insertion index.
  NnResult nearest(const Point& query) const;

  /// Every left descendant lies in its ancestor's ball and every right
  /// descendant outside it; thresholds match depths.
  bool verify_structure() const;

 private:
  NormedSpace space_;
  double tau_;
  std::vector<VpNode> nodes_;
  std::size_t leftmost_leaf_ = 0;
  std::size_t height_ = 0;
};

std::size_t leftmost_path_length(const VpTree& tree);
std::size_t height(const VpTree& tree);
NnResult nn_search(const VpTree& tree, const Point& query);

/// Linear scan baseline with the same tie rule as nn_search.
NnResult linear_scan_nearest(std::span<const Point> points, const NormedSpace& space, const Point& query);

/// Left-boundary sets I_0 = K, I_{h+1} = I_h ∩ B_{tau^{h+1}}(x_{l_h}) and the
/// 1-based insertion times l_h at which each leftmost vertex was attached.
struct LeftBoundaryRecord {
  std::vector<BallIntersection> sets;
  std::vector<std::uint64_t> attach_times;
};

/// Keeps a LeftBoundaryRecord in step with a tree under insertion.
class LeftBoundaryRecorder {
 public:
  explicit LeftBoundaryRecorder(BallIntersection body) : body_(std::move(body)) {}

  /// Call after each insertion with its result and 1-based insertion time.
  void observe(const VpTree& tree, const InsertResult& inserted, std::uint64_t time);

  const LeftBoundaryRecord& record() const { return record_; }
  LeftBoundaryRecord take() && { return std::move(record_); }

 private:
  BallIntersection body_;
  LeftBoundaryRecord record_;
};

struct BuildResult {
  VpTree tree;
  LeftBoundaryRecord record;
};

BuildResult build(std::span<const Point> points, const NormedSpace& space, double tau, const BodySpec& body = {});

/// n i.i.d. uniform points of the body.
std::vector<Point> sample_body(const NormedSpace& space, const BodySpec& body, std::size_t n, Rng& rng);

}  // namespace vpchain
