#pragma once

// Unit-covolume lattices, LLL reduction and exhaustive short-vector
// enumeration.
//
// A lattice vector is always reported once per +-pair: the representative
// whose first nonzero embedded coordinate is positive. Its "nu" value
// U * |v|^n (U = unit ball volume) is the volume coordinate used by every
// counting statistic downstream.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "latstat/sieve.hpp"

namespace latstat::lattice {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using IntMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;
using sieve::IntVector;

// Row basis of a covolume-1 lattice in R^n.
class LatticeBasis {
 public:
  // Throws InvariantError unless rows is square with |det| = 1 within 1e-9.
  static LatticeBasis from_rows(Matrix rows);
  // Rescales a nonsingular basis to covolume 1. Throws DegeneracyError when
  // the rows are numerically dependent.
  static LatticeBasis normalized(Matrix rows);
  static LatticeBasis identity(unsigned n);

  unsigned dimension() const { return static_cast<unsigned>(rows_.rows()); }
  const Matrix& rows() const { return rows_; }
  // coords * rows, accumulated in long double.
  Vector embed(const IntVector& coords) const;

 private:
  explicit LatticeBasis(Matrix rows) : rows_(std::move(rows)) {}
  Matrix rows_;
};

// Rows of `reduced` equal transform * rows of the input; transform is
// unimodular.
struct LllResult {
  Matrix rows;
  IntMatrix transform;
};

// LLL with Lovasz parameter delta in (0.25, 1) on an arbitrary nonsingular
// real basis (rows need not have determinant 1). Integer-valued inputs stay
// exact up to 2^63 since basis updates are integer row operations on
// long double data. Throws DomainError for a bad delta and DegeneracyError
// for a numerically singular basis.
LllResult lll_reduce_rows(const Matrix& rows, double delta = 0.99);

struct ReducedBasis {
  LatticeBasis basis;
  IntMatrix transform;
};

ReducedBasis lll_reduce(const LatticeBasis& b, double delta = 0.99);

// True iff `rows` is size reduced (|mu| <= 1/2 + eps) and satisfies the
// Lovasz condition with parameter delta (up to eps).
bool is_lll_reduced(const Matrix& rows, double delta, double eps = 1e-9);

struct SignNormalizedVector {
  IntVector coords;  // with respect to the caller's basis
  Vector embedding;
  double length = 0.0;
  double nu = 0.0;
};

// Volume <-> radius in dimension n.
double radius_for_volume(double volume, unsigned n);
double volume_for_radius(double radius, unsigned n);

struct EnumerationOptions {
  // Refuse to enumerate when about this many +-pairs are expected.
  double max_points = 1e7;
  double lll_delta = 0.99;
};

// Reduces once and answers repeated ball queries on the same lattice.
class BallEnumerator {
 public:
  explicit BallEnumerator(const LatticeBasis& basis, EnumerationOptions options = {});

  // Every nonzero sign-normalized vector with |v| <= radius, sorted by length
  // with ties broken lexicographically on coords. Throws ResourceError when
  // the expected count exceeds the cap.
  std::vector<SignNormalizedVector> within_radius(double radius) const;
  std::vector<SignNormalizedVector> within_volume(double volume) const;

  const LatticeBasis& basis() const { return basis_; }
  // Length of the shortest row of the reduced basis (an upper bound for lambda_1).
  double shortest_reduced_row() const;

 private:
  LatticeBasis basis_;
  EnumerationOptions options_;
  unsigned n_;
  // Reduced basis data.
  std::vector<std::vector<long double>> mu_;
  std::vector<long double> bstar_sq_;
  IntMatrix transform_;
  double min_row_ = 0.0;
};

std::vector<SignNormalizedVector> enumerate_ball(const LatticeBasis& b, double radius,
                                                 const EnumerationOptions& options = {});

// Origin-centred annulus in volume units: nu in (s, t).
class AnnulusSpec {
 public:
  // Throws DomainError unless 0 <= s < t.
  AnnulusSpec(double s, double t);
  double s() const { return s_; }
  double t() const { return t_; }
  double volume() const { return t_ - s_; }
  bool contains(double nu) const { return nu > s_ && nu < t_; }

 private:
  double s_;
  double t_;
};

// Throws DomainError unless t_i <= s_{i+1} for consecutive annuli.
void check_disjoint_sorted(const std::vector<AnnulusSpec>& annuli);

// Number of sign-normalized vectors with nu strictly inside each annulus.
std::vector<std::size_t> annulus_counts(const LatticeBasis& b, const std::vector<AnnulusSpec>& annuli,
                                        const EnumerationOptions& options = {});
std::vector<std::size_t> annulus_counts(std::span<const SignNormalizedVector> sorted_vectors,
                                        const std::vector<AnnulusSpec>& annuli);

// lambda_1 <= ... <= lambda_k via a greedy rank-increasing scan of the
// length-sorted enumeration, growing the enumerated volume until k
// independent vectors appear. Throws DomainError if k == 0 or k > n.
std::vector<double> successive_minima(const BallEnumerator& e, unsigned k);
std::vector<double> successive_minima(const LatticeBasis& b, unsigned k);

// The first k sign-normalized vectors with nu > s in increasing length.
std::vector<SignNormalizedVector> shortest_vectors(const BallEnumerator& e, unsigned k, double s);
std::vector<SignNormalizedVector> shortest_vectors(const LatticeBasis& b, unsigned k, double s);

}  // namespace latstat::lattice
