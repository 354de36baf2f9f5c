#include "vpchain/vptree.hpp"

#include <cmath>
#include <limits>

namespace vpchain {

namespace {

// Slack on triangle-inequality pruning so rounding never discards a tie.
double prune_slack(double a, double b) { return 1e-12 * (1.0 + std::abs(a) + std::abs(b)); }

}  // namespace

VpTree::VpTree(NormedSpace space, double tau) : space_(space), tau_(tau) { check_tau(tau); }

InsertResult VpTree::insert(const Point& x) {
  space_.check_dim(x);
  const auto index = nodes_.size();
  if (nodes_.empty()) {
    nodes_.push_back({x, tau_, -1, -1, 0});
    leftmost_leaf_ = 0;
    return {index, true};
  }
  std::size_t cur = 0;
  bool all_left = true;
  for (;;) {
    VpNode& y = nodes_[cur];
    const bool inside = space_.distance(x, y.point) <= y.threshold;
    all_left = all_left && inside;
    std::int32_t& child = inside ? y.left : y.right;
    if (child < 0) {
      const std::uint32_t depth = y.depth + 1;
      child = static_cast<std::int32_t>(index);
      nodes_.push_back({x, std::pow(tau_, static_cast<double>(depth) + 1.0), -1, -1, depth});
      height_ = std::max<std::size_t>(height_, depth);
      if (all_left) leftmost_leaf_ = index;
      return {index, all_left};
    }
    cur = static_cast<std::size_t>(child);
  }
}

std::size_t VpTree::leftmost_path_length() const { return empty() ? 0 : nodes_[leftmost_leaf_].depth; }

std::vector<std::size_t> VpTree::leftmost_path() const {
  std::vector<std::size_t> path;
  if (empty()) return path;
  std::int32_t cur = 0;
  while (cur >= 0) {
    path.push_back(static_cast<std::size_t>(cur));
    cur = nodes_[static_cast<std::size_t>(cur)].left;
  }
  return path;
}

NnResult VpTree::nearest(const Point& query) const {
  space_.check_dim(query);
  NnResult best;
  best.distance = std::numeric_limits<double>::infinity();
  if (empty()) return best;

  auto consider = [&](std::size_t i, double d) {
    if (d < best.distance || (d == best.distance && i < best.index)) {
      best.distance = d;
      best.index = i;
    }
  };

  std::vector<std::int32_t> stack{0};
  while (!stack.empty()) {
    const auto i = static_cast<std::size_t>(stack.back());
    stack.pop_back();
    const VpNode& y = nodes_[i];
    const double d = space_.distance(query, y.point);
    ++best.visited;
    consider(i, d);
    // Left points satisfy |q - p| >= d - r; right points |q - p| > r - d.
    const double slack = prune_slack(d, y.threshold);
    const bool inside = d <= y.threshold;
    const std::int32_t near = inside ? y.left : y.right;
    const std::int32_t far = inside ? y.right : y.left;
    // Far side pushed first so the near side is searched first.
    if (far >= 0) {
      const bool far_is_left = !inside;
      const double bound = far_is_left ? d - y.threshold : y.threshold - d;
      // The right-side bound is strict, so equality cannot hide a tie there.
      const bool can_hold = far_is_left ? bound <= best.distance + slack : bound < best.distance + slack;
      if (can_hold) stack.push_back(far);
    }
    if (near >= 0) stack.push_back(near);
  }
  best.point = nodes_[best.index].point;
  return best;
}

bool VpTree::verify_structure() const {
  // Walk every node's subtree checking the side invariant against it.
  for (std::size_t a = 0; a < nodes_.size(); ++a) {
    const VpNode& anc = nodes_[a];
    if (std::abs(anc.threshold - std::pow(tau_, anc.depth + 1.0)) > 1e-12 * anc.threshold) return false;
    for (int side = 0; side < 2; ++side) {
      const std::int32_t root = side == 0 ? anc.left : anc.right;
      if (root < 0) continue;
      std::vector<std::int32_t> stack{root};
      while (!stack.empty()) {
        const VpNode& n = nodes_[static_cast<std::size_t>(stack.back())];
        stack.pop_back();
        const bool inside = space_.distance(n.point, anc.point) <= anc.threshold;
        if (inside != (side == 0)) return false;
        if (n.left >= 0) stack.push_back(n.left);
        if (n.right >= 0) stack.push_back(n.right);
      }
    }
  }
  return true;
}

std::size_t leftmost_path_length(const VpTree& tree) { return tree.leftmost_path_length(); }
std::size_t height(const VpTree& tree) { return tree.height(); }
NnResult nn_search(const VpTree& tree, const Point& query) { return tree.nearest(query); }

NnResult linear_scan_nearest(std::span<const Point> points, const NormedSpace& space, const Point& query) {
  NnResult best;
  best.distance = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double d = space.distance(query, points[i]);
    ++best.visited;
    if (d < best.distance) {
      best.distance = d;
      best.index = i;
    }
  }
  if (!points.empty()) best.point = points[best.index];
  return best;
}

void LeftBoundaryRecorder::observe(const VpTree& tree, const InsertResult& inserted, std::uint64_t time) {
  if (!inserted.extends_leftmost) return;
  if (record_.sets.empty()) {
    record_.sets.push_back(body_);
  } else {
    const VpNode& parent = tree.node(tree.leftmost_path()[record_.sets.size() - 1]);
    record_.sets.push_back(record_.sets.back().with_ball(Ball{parent.point, parent.threshold}));
  }
  record_.attach_times.push_back(time);
}

BuildResult build(std::span<const Point> points, const NormedSpace& space, double tau, const BodySpec& body) {
  if (points.empty()) throw UsageError("build: points must be nonempty");
  VpTree tree(space, tau);
  LeftBoundaryRecorder recorder(body.make(space));
  for (std::size_t i = 0; i < points.size(); ++i) recorder.observe(tree, tree.insert(points[i]), i + 1);
  return {std::move(tree), std::move(recorder).take()};
}

std::vector<Point> sample_body(const NormedSpace& space, const BodySpec& body, std::size_t n, Rng& rng) {
  const auto set = body.make(space);
  std::vector<Point> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(sample_uniform(set, rng));
  return out;
}

}  // namespace vpchain
