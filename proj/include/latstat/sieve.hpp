#pragma once

// Exact combinatorics behind the Schmidt sieve: the alternating binomial
// identity, the zigzag bound on weighted alternating sums, subset families
// closed under removal/insertion, and exact corank of integer vector tuples.
//
// Everything here is integer or rational arithmetic; the inequalities are
// sharp, so no floating point is used.

#include <cstdint>
#include <span>
#include <vector>

#include <gmpxx.h>

namespace latstat::sieve {

using IntVector = std::vector<std::int64_t>;

// sum_{h=k}^{alpha} (-1)^{h-k} C(h-1,k-1) C(M,h).
// >= 1 when alpha-k is even and <= 1 when odd. Throws DomainError if M < k,
// k == 0 or alpha < k.
mpz_class alternating_binomial_sum(unsigned M, unsigned k, unsigned alpha);

enum class ZigzagMode {
  // sigma_{k+2t-1} >= sigma_{k+2t} <= sigma_{k+2t+1}
  kSigma,
  // tau_{k+2t-1} <= tau_{k+2t} >= tau_{k+2t+1}
  kTau,
};

// A sequence x_{k-1}, x_k, ..., x_top of rationals in [0,1] with the
// alternating monotonicity pattern selected by `mode`.
class ZigzagSequence {
 public:
  // Throws InvariantError when a value leaves [0,1] or the pattern breaks.
  ZigzagSequence(unsigned k, std::vector<mpq_class> values, ZigzagMode mode);

  unsigned k() const { return k_; }
  ZigzagMode mode() const { return mode_; }
  // Largest index present.
  unsigned top() const { return k_ - 1 + static_cast<unsigned>(values_.size()) - 1; }
  // Value at index h, for k-1 <= h <= top().
  const mpq_class& at(unsigned h) const;
  const std::vector<mpq_class>& values() const { return values_; }

 private:
  unsigned k_;
  std::vector<mpq_class> values_;
  ZigzagMode mode_;
};

// Evaluates sum_{h=k}^{bound} (-1)^{h-k} C(h-1,k-1) C(M,h) x_h and compares it
// with x_{k-1}: "<=" in sigma mode (bound-k odd), ">=" in tau mode (bound-k
// even). Throws DomainError on a parity mismatch or when the sequence does
// not reach index `bound`.
bool sieve_bound_check(const ZigzagSequence& seq, unsigned M, unsigned bound);

// Subsets of a universe {0..M-1} as bitmasks.
using Subset = std::uint32_t;
inline constexpr unsigned kMaxUniverse = 20;

// A_i and A'_i, i = 0..M, each a list of i-element subsets. A must be closed
// under removing one element (A_i -> A_{i-1}), and A' must contain every
// one-element extension of a member of A (A_{i-1} -> A'_i).
struct SubsetFamilyPair {
  unsigned universe_size = 0;
  std::vector<std::vector<Subset>> A;
  std::vector<std::vector<Subset>> A_prime;

  // Throws InvariantError naming the first offending subset found. Checks
  // sizes, cardinalities and both closure properties.
  void validate() const;
};

struct FamilyProportions {
  // Indexed 0..M.
  std::vector<mpq_class> sigma;
  std::vector<mpq_class> tau;
};

// sigma_i C(M,i) = |A_i| when i - parity_origin is even and |A'_i| otherwise;
// tau_i swaps the roles. parity_origin = 1 is the unshifted case (odd i reads
// A); parity_origin = k gives the index shift used when the sieve starts at
// k. Validates `fam` first.
FamilyProportions family_proportions(const SubsetFamilyPair& fam, unsigned parity_origin = 1);

// The alternation of the proportions on indices parity_origin..M:
// sigma_o <= sigma_{o+1} >= sigma_{o+2} ... and tau_o >= tau_{o+1} <= ...
bool zigzag_holds(const FamilyProportions& props, unsigned parity_origin = 1);

// Sieve input starting at k: `anchor` at index k-1 followed by sigma_h (or
// tau_h) for h = k..M. Requires props computed with parity_origin == k.
ZigzagSequence make_sieve_sequence(const FamilyProportions& props, unsigned k, ZigzagMode mode,
                                   const mpq_class& anchor);

// A tuple of integer coordinate vectors, all nonzero and pairwise distinct,
// all of the same dimension.
class CoordinateTuple {
 public:
  CoordinateTuple() = default;
  // Throws InvariantError on zero, duplicate or ragged vectors.
  explicit CoordinateTuple(std::vector<IntVector> vectors);

  std::size_t size() const { return vectors_.size(); }
  bool empty() const { return vectors_.empty(); }
  const std::vector<IntVector>& vectors() const { return vectors_; }

 private:
  std::vector<IntVector> vectors_;
};

// Rank of the rows by fraction-free (Bareiss) elimination over Z.
std::size_t integer_rank(std::span<const IntVector> rows);

// |t| - rank(t). Empty tuple -> 0.
std::size_t corank(const CoordinateTuple& t);

// Families induced by corank over a universe of vectors, optionally on top
// of a fixed anchor tuple: A_i = {E : corank(anchor + E) == 0} and
// A'_i = {E : corank(anchor + E) <= 1}. Exhaustive over subsets, so the
// universe is limited to kMaxUniverse vectors.
SubsetFamilyPair corank_family_pair(std::span<const IntVector> universe,
                                    std::span<const IntVector> anchor = {});

}  // namespace latstat::sieve
