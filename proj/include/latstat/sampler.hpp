#pragma once

// Random unit-covolume lattices from the Construction-A ensemble and uniform
// points on spheres, driven by counter-based per-trial random streams.

#include <cstdint>
#include <limits>
#include <vector>

#include "latstat/lattice.hpp"

namespace latstat::sampler {

inline constexpr std::uint64_t kDefaultPrime = 2147483647ULL;  // 2^31 - 1

enum class BaseLattice {
  // Sublattices of Z^n itself.
  kInteger,
  // Sublattices of Z^n g with g = diag(e^u) (I + N) drawn per trial:
  // u_i uniform in [-1/4, 1/4] centred to sum 0, N strictly upper
  // triangular with entries uniform in [-1/2, 1/2].
  kSheared,
};

struct EnsembleConfig {
  unsigned n = 2;
  std::uint64_t p = kDefaultPrime;
  std::uint64_t seed = 0;
  std::uint64_t trial_index = 0;
  BaseLattice base = BaseLattice::kSheared;
};

const char* base_lattice_name(BaseLattice b);

// SplitMix64 finaliser.
std::uint64_t mix64(std::uint64_t x);

// Stateless-by-construction stream: output i is mix64(key + (i+1) * golden).
// Satisfies UniformRandomBitGenerator, so the standard distributions apply.
class CounterRng {
 public:
  using result_type = std::uint64_t;
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

  // Uniform double in [0, 1) with 53 random bits.
  double uniform();
  std::uint64_t key() const { return key_; }
  std::uint64_t position() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Keys are injective in trial_index for a fixed seed.
CounterRng derive_trial_rng(std::uint64_t seed, std::uint64_t trial_index);

bool is_prime(std::uint64_t p);

// Unreduced integer basis of {x in Z^n : a . x = 0 mod p} for a nonzero a.
// With j the first index where a_j != 0 and c = a / a_j, the rows are p e_j
// and e_i - c_i e_j (i != j).
lattice::Matrix construction_a_basis(const std::vector<std::uint64_t>& a, std::uint64_t p);

// Uniform nonzero a in (Z/p)^n drawn from the trial stream.
std::vector<std::uint64_t> draw_congruence(const EnsembleConfig& cfg);

// LLL-reduced integer basis of the index-p sublattice for the trial (not
// rescaled). Throws DomainError if p is not prime or n == 0.
lattice::Matrix construction_a_integer_basis(const EnsembleConfig& cfg);

// Random base deformation g for the trial (identity for kInteger); det g = 1.
lattice::Matrix draw_base_deformation(const EnsembleConfig& cfg);

// The integer lattice mapped by the base deformation, LLL-reduced and
// scaled by p^{-1/n} to covolume 1.
lattice::LatticeBasis sample_construction_a(const EnsembleConfig& cfg);

// Normalized standard Gaussian vector.
lattice::Vector sample_uniform_sphere(unsigned n, CounterRng& rng);

}  // namespace latstat::sampler
