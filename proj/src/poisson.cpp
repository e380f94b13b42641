#include "latstat/poisson.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "latstat/error.hpp"
#include "latstat/stats.hpp"

namespace latstat::poisson {
namespace {

double log_binomial(unsigned n, unsigned k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

}  // namespace

double ball_volume_unit(unsigned n) {
  const double half = 0.5 * n;
  return std::exp(half * std::log(std::numbers::pi) - std::lgamma(half + 1.0));
}

double poisson_pmf(PoissonParams p) {
  if (p.lambda < 0.0) throw DomainError("poisson_pmf: negative mean");
  if (p.lambda == 0.0) return p.k == 0 ? 1.0 : 0.0;
  return std::exp(-p.lambda + p.k * std::log(p.lambda) - std::lgamma(p.k + 1.0));
}

double poisson_right_cdf(PoissonParams p) {
  if (p.lambda < 0.0) throw DomainError("poisson_right_cdf: negative mean");
  if (p.k == 0) return 1.0;
  if (p.lambda == 0.0) return 0.0;
  stats::CompensatedSum sum;
  if (p.k > p.lambda) {
    // Tail terms decrease from j = k on; sum until they stop mattering.
    double term = poisson_pmf(p);
    for (unsigned j = p.k; term > 0.0; ++j) {
      sum.add(term);
      if (term < sum.value() * 1e-18) break;
      term *= p.lambda / (j + 1.0);
    }
    return std::min(1.0, sum.value());
  }
  double term = std::exp(-p.lambda);
  for (unsigned j = 0; j < p.k; ++j) {
    sum.add(term);
    term *= p.lambda / (j + 1.0);
  }
  return std::max(0.0, 1.0 - sum.value());
}

double q_term(double lambda, unsigned k, unsigned h) {
  if (k == 0 || h < k) throw DomainError("q_term: requires 1 <= k <= h");
  if (lambda == 0.0) return 0.0;
  // lambda^h / (h (h-k)! (k-1)!)
  return std::exp(h * std::log(lambda) - std::log(static_cast<double>(h)) -
                  std::lgamma(h - k + 1.0) - std::lgamma(static_cast<double>(k)));
}

double truncated_q_series(double lambda, unsigned k, unsigned alpha) {
  if (k == 0) throw DomainError("truncated_q_series: k must be positive");
  if (alpha < k) throw DomainError("truncated_q_series: requires alpha >= k");
  if (lambda < 0.0) throw DomainError("truncated_q_series: negative mean");
  stats::CompensatedSum sum;
  for (unsigned h = k; h <= alpha; ++h) {
    const double q = q_term(lambda, k, h);
    sum.add((h - k) % 2 == 0 ? q : -q);
  }
  return sum.value();
}

double corank1_error_term(unsigned n, double V, unsigned h) {
  if (h == 0) throw DomainError("corank1_error_term: h must be positive");
  if (V < 0.0) throw DomainError("corank1_error_term: negative volume");
  const double lambda = 0.5 * V;
  double log_prefactor = -std::lgamma(static_cast<double>(h));
  if (h > 1) {
    if (lambda == 0.0) return 0.0;
    log_prefactor += (h - 1) * std::log(lambda);
  }
  // log(3^h (3/4)^{n/2} + 5^h 2^{-n}) via log-sum-exp.
  const double a = h * std::log(3.0) + 0.5 * n * std::log(0.75);
  const double b = h * std::log(5.0) - n * std::numbers::ln2;
  const double hi = std::max(a, b);
  const double lse = hi + std::log(std::exp(a - hi) + std::exp(b - hi));
  return std::exp(log_prefactor + lse);
}

BracketBound schmidt_bracket(unsigned n, double V, unsigned k) {
  if (k == 0) throw DomainError("schmidt_bracket: k must be positive");
  if (k + 1 >= n) throw DomainError("schmidt_bracket: requires k < n-1");
  if (V < 0.0) throw DomainError("schmidt_bracket: negative volume");
  const double lambda = 0.5 * V;
  BracketBound out;
  const unsigned a1 = n - 1;
  const unsigned a2 = n - 2;
  const bool a1_odd = (a1 - k) % 2 == 1;
  out.alpha_lower = a1_odd ? a1 : a2;
  out.alpha_upper = a1_odd ? a2 : a1;
  out.main_lower = truncated_q_series(lambda, k, out.alpha_lower);
  out.main_upper = truncated_q_series(lambda, k, out.alpha_upper);
  out.main_term = truncated_q_series(lambda, k, a1);

  stats::CompensatedSum err;
  for (unsigned h = k; h <= a1; ++h) {
    const double e = corank1_error_term(n, V, h);
    if (e == 0.0) continue;
    err.add(std::exp(log_binomial(h - 1, k - 1) + std::log(e)));
  }
  out.error_term = err.value();
  out.lower = out.main_lower - out.error_term;
  out.upper = out.main_upper + out.error_term;
  out.in_proven_range = V + k <= 0.25 * n * std::log(4.0 / 3.0);
  return out;
}

double joint_main_term(const AnnulusProfile& a) {
  if (a.volumes.empty() || a.volumes.size() != a.counts.size()) {
    throw DomainError("joint_main_term: need matching, nonempty volumes and counts");
  }
  double prod = 1.0;
  const std::size_t d = a.volumes.size();
  for (std::size_t i = 0; i + 1 < d; ++i) prod *= poisson_pmf(0.5 * a.volumes[i], a.counts[i]);
  return prod * poisson_right_cdf(0.5 * a.volumes[d - 1], a.counts[d - 1]);
}

double joint_exact_count_term(const AnnulusProfile& a) {
  if (a.volumes.empty() || a.volumes.size() != a.counts.size()) {
    throw DomainError("joint_exact_count_term: need matching, nonempty volumes and counts");
  }
  double prod = 1.0;
  for (std::size_t i = 0; i < a.volumes.size(); ++i) {
    prod *= poisson_pmf(0.5 * a.volumes[i], a.counts[i]);
  }
  return prod;
}

mpq_class joint_coefficient(const std::vector<unsigned>& k, const std::vector<unsigned>& alpha) {
  if (k.empty() || k.size() != alpha.size()) {
    throw DomainError("joint_coefficient: k and alpha must have the same nonzero length");
  }
  const std::size_t d = k.size();
  if (k[d - 1] == 0 && alpha[d - 1] > 0) {
    throw DomainError("joint_coefficient: undefined for k_d = 0 with alpha_d > 0");
  }
  mpz_class num = 1;
  mpz_class den = 1;
  for (std::size_t i = 0; i < d; ++i) {
    mpz_class b;
    if (i + 1 < d) {
      mpz_bin_uiui(b.get_mpz_t(), k[i] + alpha[i], k[i]);
    } else if (k[i] == 0) {
      b = 1;
    } else {
      mpz_bin_uiui(b.get_mpz_t(), k[i] + alpha[i] - 1, k[i] - 1);
    }
    num *= b;
    mpz_class f;
    mpz_fac_ui(f.get_mpz_t(), k[i] + alpha[i]);
    den *= f;
  }
  mpq_class out(num, den);
  out.canonicalize();
  return out;
}

}  // namespace latstat::poisson
