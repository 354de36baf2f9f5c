#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace vpchain {

/// Neumaier-compensated sum.
double kahan_sum(std::span<const double> xs);
double kahan_mean(std::span<const double> xs);

struct SampleSummary {
  double mean = 0.0;
  double std_error = 0.0;  // of the mean
  double std_dev = 0.0;
  std::size_t n = 0;
};

SampleSummary summarize(std::span<const double> xs);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool overlaps(const Interval& o) const { return lo <= o.hi && o.lo <= hi; }
  bool contains(double x) const { return lo <= x && x <= hi; }
};

/// Wilson score interval for a binomial proportion.
Interval wilson_interval(std::size_t successes, std::size_t trials, double z = 1.959963984540054);

/// mean +- z * std_error.
Interval normal_interval(double mean, double std_error, double z = 1.959963984540054);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Two-sample Kolmogorov-Smirnov test with the asymptotic Kolmogorov
/// distribution (conservative for discrete data).
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Survival function of the Kolmogorov distribution, P{K > lambda}.
double kolmogorov_survival(double lambda);

/// Upper tail of the chi-square distribution with `dof` degrees of freedom.
double chi_square_survival(double statistic, double dof);

/// Least-squares slope of y on x.
double ols_slope(std::span<const double> x, std::span<const double> y);

}  // namespace vpchain
