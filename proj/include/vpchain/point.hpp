#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>

namespace vpchain {

/// Largest supported dimension. Rejection sampling makes anything past d = 3
/// impractical anyway; the cap keeps points allocation-free.
inline constexpr std::size_t kMaxDim = 8;

/// Fixed-capacity point in R^d, d <= kMaxDim.
class Point {
 public:
  Point() = default;

  explicit Point(std::size_t dim) : dim_(dim) {
    if (dim > kMaxDim) throw std::invalid_argument("Point: dimension exceeds kMaxDim");
  }

  Point(std::initializer_list<double> coords) : Point(coords.size()) {
    std::copy(coords.begin(), coords.end(), x_.begin());
  }

  explicit Point(std::span<const double> coords) : Point(coords.size()) {
    std::copy(coords.begin(), coords.end(), x_.begin());
  }

  static Point zero(std::size_t dim) { return Point(dim); }

  std::size_t dim() const { return dim_; }
  double operator[](std::size_t i) const { return x_[i]; }
  double& operator[](std::size_t i) { return x_[i]; }

  std::span<const double> coords() const { return {x_.data(), dim_}; }

  Point& operator+=(const Point& o) {
    for (std::size_t i = 0; i < dim_; ++i) x_[i] += o.x_[i];
    return *this;
  }
  Point& operator-=(const Point& o) {
    for (std::size_t i = 0; i < dim_; ++i) x_[i] -= o.x_[i];
    return *this;
  }
  Point& operator*=(double s) {
    for (std::size_t i = 0; i < dim_; ++i) x_[i] *= s;
    return *this;
  }
  Point& operator/=(double s) {
    for (std::size_t i = 0; i < dim_; ++i) x_[i] /= s;
    return *this;
  }

  friend Point operator+(Point a, const Point& b) { return a += b; }
  friend Point operator-(Point a, const Point& b) { return a -= b; }
  friend Point operator*(Point a, double s) { return a *= s; }
  friend Point operator*(double s, Point a) { return a *= s; }
  friend Point operator/(Point a, double s) { return a /= s; }

  friend bool operator==(const Point& a, const Point& b) {
    return a.dim_ == b.dim_ && std::equal(a.x_.begin(), a.x_.begin() + a.dim_, b.x_.begin());
  }

 private:
  std::array<double, kMaxDim> x_{};
  std::size_t dim_ = 0;
};

}  // namespace vpchain
