#pragma once

// Independent reference computations for the unit tests. Nothing here calls
// into the library's geometry or search code paths.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

namespace oracle {

enum class Norm { L1, L2, Linf };

inline double norm(Norm kind, const std::vector<double>& x) {
  double acc = 0.0;
  for (double v : x) {
    switch (kind) {
      case Norm::L1: acc += std::fabs(v); break;
      case Norm::L2: acc += v * v; break;
      case Norm::Linf: acc = std::max(acc, std::fabs(v)); break;
    }
  }
  return kind == Norm::L2 ? std::sqrt(acc) : acc;
}

inline double dist(Norm kind, const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> diff(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
  return norm(kind, diff);
}

struct Disk {
  std::vector<double> c;
  double r;
};

/// Brute-force nearest neighbor, ties to the smaller index.
inline std::size_t nearest(Norm kind, const std::vector<std::vector<double>>& pts, const std::vector<double>& q) {
  std::size_t best = 0;
  double bd = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double d = dist(kind, pts[i], q);
    if (d < bd) {
      bd = d;
      best = i;
    }
  }
  return best;
}

/// Largest inscribed radius over a square grid of candidate centers in
/// [lo, hi]^2, refined repeatedly around the best point.
struct GridResult {
  double radius;
  double x;
  double y;
};

inline GridResult grid_inscribed_2d(Norm kind, const std::vector<Disk>& disks, double lo, double hi,
                                    int steps = 801) {
  auto radius_at = [&](double x, double y) {
    double r = std::numeric_limits<double>::infinity();
    for (const auto& d : disks) r = std::min(r, d.r - dist(kind, {x, y}, d.c));
    return r;
  };
  GridResult best{-std::numeric_limits<double>::infinity(), 0, 0};
  double x0 = lo, y0 = lo, span = hi - lo;
  for (int pass = 0; pass < 6; ++pass) {
    const double h = span / (steps - 1);
    for (int i = 0; i < steps; ++i) {
      for (int j = 0; j < steps; ++j) {
        const double x = x0 + i * h;
        const double y = y0 + j * h;
        const double r = radius_at(x, y);
        if (r > best.radius) best = {r, x, y};
      }
    }
    // The objective is concave but its ridges can be thin, so keep a wide
    // window around the best point.
    span = 20 * h;
    x0 = best.x - 10 * h;
    y0 = best.y - 10 * h;
  }
  return best;
}

/// Area of the intersection of two unit Euclidean disks at center distance D.
inline double lens_area(double D) { return 2.0 * std::acos(D / 2.0) - (D / 2.0) * std::sqrt(4.0 - D * D); }

/// Probability mass of each cell of a 4^d grid over [-1,1]^d under the
/// uniform law on the unit ball, by midpoint quadrature with `per_cell`
/// points per axis inside each cell.
inline std::vector<double> grid_cell_masses(Norm kind, int d, int per_cell) {
  const int cells_per_axis = 4;
  const int total = static_cast<int>(std::pow(cells_per_axis, d));
  const int res = cells_per_axis * per_cell;
  const double h = 2.0 / res;
  std::vector<double> mass(total, 0.0);
  std::vector<int> idx(d, 0);
  double inside = 0.0;
  const long long points = static_cast<long long>(std::pow(res, d));
  std::vector<double> x(d);
  for (long long p = 0; p < points; ++p) {
    long long rem = p;
    int cell = 0;
    for (int k = 0; k < d; ++k) {
      const int i = static_cast<int>(rem % res);
      rem /= res;
      x[k] = -1.0 + (i + 0.5) * h;
      cell = cell * cells_per_axis + i / per_cell;
    }
    if (norm(kind, x) <= 1.0) {
      mass[cell] += 1.0;
      inside += 1.0;
    }
  }
  for (double& m : mass) m /= inside;
  return mass;
}

}  // namespace oracle
