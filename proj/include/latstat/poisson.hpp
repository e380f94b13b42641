#pragma once

// Poisson quantities and the explicit bounds of the sieve argument.
//
// Factorial-heavy expressions are evaluated in log space so that V and k up
// to a few percent of n stay finite for n in the hundreds. Exact rational
// counterparts live in the test suite.

#include <vector>

#include <gmpxx.h>

namespace latstat::poisson {

struct PoissonParams {
  double lambda = 0.0;
  unsigned k = 0;
};

// Volume of the unit ball in R^n, pi^{n/2} / Gamma(n/2 + 1).
double ball_volume_unit(unsigned n);

// e^{-lambda} lambda^k / k!
double poisson_pmf(PoissonParams p);
inline double poisson_pmf(double lambda, unsigned k) { return poisson_pmf({lambda, k}); }

// Q(lambda, k) = P(X >= k) for X ~ Poisson(lambda).
double poisson_right_cdf(PoissonParams p);
inline double poisson_right_cdf(double lambda, unsigned k) { return poisson_right_cdf({lambda, k}); }

// q_h = lambda^h / h! * C(h-1, k-1), the h-th term of the alternating
// expansion of Q(lambda, k).
double q_term(double lambda, unsigned k, unsigned h);

// sum_{h=k}^{alpha} (-1)^{h-k} q_h. |result - Q(lambda,k)| <= q_alpha.
// Throws DomainError if k == 0 or alpha < k.
double truncated_q_series(double lambda, unsigned k, unsigned alpha);

// (V/2)^{h-1}/(h-1)! * (3^h (3/4)^{n/2} + 5^h 2^{-n}): the mean excess of
// corank-<=1 over independent h-tuples.
double corank1_error_term(unsigned n, double V, unsigned h);

struct BracketBound {
  double lower = 0.0;
  double upper = 0.0;
  // Truncated series at alpha = n-1.
  double main_term = 0.0;
  double error_term = 0.0;
  // Truncations used for each side: alpha-k odd (lower), even (upper).
  double main_lower = 0.0;
  double main_upper = 0.0;
  unsigned alpha_lower = 0;
  unsigned alpha_upper = 0;
  // V + k <= (n/4) log(4/3), the range where the bracket is proven to be
  // dominated by Q.
  bool in_proven_range = false;
};

// Two-sided bound on the probability of at least k sign-normalized lattice
// vectors in a set of volume V. Requires 1 <= k < n-1.
BracketBound schmidt_bracket(unsigned n, double V, unsigned k);

struct AnnulusProfile {
  std::vector<double> volumes;
  std::vector<unsigned> counts;
};

// prod_{i<d} p(V_i/2, k_i) * Q(V_d/2, k_d).
double joint_main_term(const AnnulusProfile& a);

// Same product with p on every annulus (exact counts everywhere).
double joint_exact_count_term(const AnnulusProfile& a);

// prod_{i<d} C(k_i+a_i, k_i) * C(k_d+a_d-1, k_d-1) / prod_i (k_i+a_i)!
// C(k_d+a_d-1, k_d-1) is taken as 1 when k_d = a_d = 0; k_d = 0 with a_d > 0
// is a DomainError.
mpq_class joint_coefficient(const std::vector<unsigned>& k, const std::vector<unsigned>& alpha);

}  // namespace latstat::poisson
