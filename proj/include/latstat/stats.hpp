#pragma once

// Small statistics toolkit for the Monte-Carlo experiments: compensated
// accumulation, sample summaries, discrete/continuous distances and a few
// interval estimates.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace latstat::stats {

// Neumaier-compensated running sum. Summation order still matters at the
// last ulp, so callers that need worker-count independence feed values in a
// fixed order.
class CompensatedSum {
 public:
  void add(double x);
  double value() const { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

struct Summary {
  std::size_t count = 0;
  double mean = 0.0;
  // Unbiased (n-1) sample variance.
  double variance = 0.0;
  // Standard error of the mean, sqrt(variance / count).
  double stderr_mean = 0.0;
};

Summary summarize(std::span<const double> xs);

// Normalized histogram of nonnegative integer observations, index = value.
std::vector<double> empirical_pmf(std::span<const unsigned> xs);

// Total variation distance between two pmfs on {0, 1, ...}; missing entries
// count as zero. `tail_b` is extra mass of b outside its listed support.
double total_variation(std::span<const double> a, std::span<const double> b, double tail_b = 0.0);

// One-sample Kolmogorov-Smirnov statistic sup |F_n - F|. Sorts a copy.
double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf);

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

// Wilson score interval for a binomial proportion at z standard deviations.
Interval wilson_interval(std::size_t successes, std::size_t trials, double z = 1.96);

// sqrt(p (1-p) / trials)
double binomial_stderr(double p, std::size_t trials);

// Upper tail P(X >= x) for a chi-square variable with `dof` degrees of freedom.
double chi_square_survival(double x, double dof);

}  // namespace latstat::stats
