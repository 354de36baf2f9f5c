#pragma once

#include <stdexcept>
#include <string>

#include "vpchain/point.hpp"

namespace vpchain {

/// Bad arguments or configuration: dimension mismatch, tau outside (0,1), ...
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Rejection sampler could not find a point of the set within its trial budget.
class DegenerateSetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Iterative method did not converge. Carries the best iterate found.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, double best_value, Point best_point)
      : std::runtime_error(what), best_value_(best_value), best_point_(best_point) {}

  double best_value() const { return best_value_; }
  const Point& best_point() const { return best_point_; }

 private:
  double best_value_;
  Point best_point_;
};

}  // namespace vpchain
