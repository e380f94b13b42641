#pragma once

// Gram-Schmidt angle coordinates of vector tuples, product-form angle
// constraints T and the spherical probability A(T).
//
// theta(i,j) (j < i) is the angle between x_i, projected orthogonally to
// span(x_1..x_{j-1}), and the Gram-Schmidt vector x*_j. In these coordinates
// <x_i, x*_j>/|x*_j| = r_i sin(theta_{i,1}) ... sin(theta_{i,j-1}) cos(theta_{i,j}).
// Indices are 0-based in code and 1-based in JSON.

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "latstat/lattice.hpp"

namespace latstat::angles {

using lattice::Matrix;
using lattice::Vector;

struct AngleMatrix {
  unsigned N = 0;
  // theta(i,j) for j < i; zero elsewhere.
  Matrix theta;
  // phi(i,j) = angle between x_i and x_j; symmetric, zero diagonal.
  Matrix phi;
  // |x_i|
  Vector r;
};

// Throws DegeneracyError when |x*_j| < 1e-10 |x_j| and DomainError when the
// tuple is empty, ragged or longer than the dimension.
AngleMatrix gram_schmidt_angles(const std::vector<Vector>& x);

// mu(i,j) = r_i prod_{l<j} sin(theta(i,l)) cos(theta(i,j)) for j < i.
Matrix mu_from_angles(const AngleMatrix& m);

// t(i,j) = sqrt(n) (pi/2 - theta(i,j)) for j < i.
Matrix normalized_angles(const AngleMatrix& m, unsigned n);

enum class ExponentConvention {
  // n - j - 1: the density of theta_{i,j} for uniform points on S^{n-1}.
  kSphere,
  // n - j + 1, kept for comparison runs.
  kShifted,
};

// Exponent e with theta_{i,j} distributed as sin^e; j is 1-based.
// Throws DomainError unless 1 <= j < n.
int angle_exponent(unsigned n, unsigned j, ExponentConvention conv = ExponentConvention::kSphere);

// Finite union of closed subintervals of [0, pi], kept sorted and merged.
class IntervalSet {
 public:
  IntervalSet() = default;
  // Clips to [0, pi] and merges overlaps. Throws DomainError on a > b or NaN.
  explicit IntervalSet(std::vector<std::pair<double, double>> pieces);
  static IntervalSet full();

  const std::vector<std::pair<double, double>>& pieces() const { return pieces_; }
  bool empty() const { return pieces_.empty(); }
  bool is_full() const;
  bool contains(double theta) const;
  // {pi - x : x in this}
  IntervalSet reflected() const;
  IntervalSet united(const IntervalSet& other) const;
  bool subset_of(const IntervalSet& other, double tol = 1e-12) const;
  bool approx_equal(const IntervalSet& other, double tol = 1e-12) const;

 private:
  std::vector<std::pair<double, double>> pieces_;
};

// T = product over pairs j < i of interval sets for theta(i,j).
class ProductConstraint {
 public:
  explicit ProductConstraint(unsigned N = 0);

  unsigned N() const { return N_; }
  std::size_t pair_count() const { return sets_.size(); }
  // 0-based, j < i < N.
  const IntervalSet& at(unsigned i, unsigned j) const;
  void set(unsigned i, unsigned j, IntervalSet s);

  bool empty() const;
  bool is_full() const;
  bool contains(const AngleMatrix& m) const;
  bool subset_of(const ProductConstraint& other) const;
  bool approx_equal(const ProductConstraint& other, double tol = 1e-12) const;

  // {"N":3,"pairs":[{"i":2,"j":1,"intervals":[[0.0,1.0]]}]}, 1-based, i > j,
  // radians; pairs not listed are unconstrained.
  nlohmann::ordered_json to_json() const;
  static ProductConstraint from_json(const nlohmann::json& j);

 private:
  std::size_t index(unsigned i, unsigned j) const;
  unsigned N_;
  std::vector<IntervalSet> sets_;
};

// Product over pairs of the sin^e-weighted share of [0, pi] covered by the
// pair's intervals. Throws DomainError if N >= n.
double a_t_quadrature(const ProductConstraint& T, unsigned n,
                      ExponentConvention conv = ExponentConvention::kSphere);

struct MonteCarloEstimate {
  double estimate = 0.0;
  double stderr_estimate = 0.0;
  std::uint64_t hits = 0;
  std::uint64_t samples = 0;
};

using AnglePredicate = std::function<bool(const AngleMatrix&)>;

// Fraction of `samples` tuples of N independent uniform points on S^{n-1}
// whose angles satisfy T (or the predicate). Sampling runs in fixed blocks
// with streams derived from (seed, block), so the result does not depend on
// `workers`. Throws DomainError if samples < 100 or N > n.
MonteCarloEstimate a_t_monte_carlo(const ProductConstraint& T, unsigned n, std::uint64_t samples,
                                   std::uint64_t seed, unsigned workers = 1);
MonteCarloEstimate a_t_monte_carlo(const AnglePredicate& pred, unsigned N, unsigned n,
                                   std::uint64_t samples, std::uint64_t seed, unsigned workers = 1);

// Each pair's set I becomes I u (pi - I).
ProductConstraint symmetrize_constraint(const ProductConstraint& T);

// T is invariant under every flip x_i -> -x_i, which maps theta to pi - theta
// on each pair containing i.
bool is_centrally_symmetric(const ProductConstraint& T, double tol = 1e-12);

}  // namespace latstat::angles
