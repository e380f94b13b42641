#include "latstat/stats.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/gamma.hpp>

#include "latstat/error.hpp"

namespace latstat::stats {

void CompensatedSum::add(double x) {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x)) {
    compensation_ += (sum_ - t) + x;
  } else {
    compensation_ += (x - t) + sum_;
  }
  sum_ = t;
}

Summary summarize(std::span<const double> xs) {
  Summary s;
  s.count = xs.size();
  if (xs.empty()) return s;
  CompensatedSum total;
  for (double x : xs) total.add(x);
  s.mean = total.value() / static_cast<double>(s.count);
  if (s.count > 1) {
    CompensatedSum sq;
    for (double x : xs) sq.add((x - s.mean) * (x - s.mean));
    s.variance = sq.value() / static_cast<double>(s.count - 1);
    s.stderr_mean = std::sqrt(s.variance / static_cast<double>(s.count));
  }
  return s;
}

std::vector<double> empirical_pmf(std::span<const unsigned> xs) {
  if (xs.empty()) return {};
  const unsigned top = *std::max_element(xs.begin(), xs.end());
  std::vector<std::size_t> counts(top + 1, 0);
  for (unsigned x : xs) ++counts[x];
  std::vector<double> pmf(top + 1);
  for (std::size_t i = 0; i <= top; ++i) {
    pmf[i] = static_cast<double>(counts[i]) / static_cast<double>(xs.size());
  }
  return pmf;
}

double total_variation(std::span<const double> a, std::span<const double> b, double tail_b) {
  const std::size_t size = std::max(a.size(), b.size());
  CompensatedSum sum;
  for (std::size_t i = 0; i < size; ++i) {
    const double x = i < a.size() ? a[i] : 0.0;
    const double y = i < b.size() ? b[i] : 0.0;
    sum.add(std::abs(x - y));
  }
  sum.add(std::abs(tail_b));
  return 0.5 * sum.value();
}

double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw DomainError("ks_statistic: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max(d, std::max(f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f));
  }
  return d;
}

Interval wilson_interval(std::size_t successes, std::size_t trials, double z) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

double binomial_stderr(double p, std::size_t trials) {
  if (trials == 0) return 0.0;
  return std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(trials));
}

double chi_square_survival(double x, double dof) {
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(0.5 * dof, 0.5 * x);
}

}  // namespace latstat::stats
