#include "latstat/sampler.hpp"

#include <cmath>
#include <random>
#include <string>

#include <gmpxx.h>

#include "latstat/error.hpp"

namespace latstat::sampler {
namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kIndexStride = 0xD1B54A32D192ED03ULL;  // odd

std::uint64_t mod_inverse(std::uint64_t a, std::uint64_t p) {
  mpz_class r;
  const mpz_class az(std::to_string(a)), pz(std::to_string(p));
  mpz_invert(r.get_mpz_t(), az.get_mpz_t(), pz.get_mpz_t());
  return std::stoull(r.get_str());
}

std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b, std::uint64_t p) {
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % p);
}

}  // namespace

std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

CounterRng::result_type CounterRng::operator()() {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

double CounterRng::uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

CounterRng derive_trial_rng(std::uint64_t seed, std::uint64_t trial_index) {
  return CounterRng(mix64(seed) + trial_index * kIndexStride);
}

bool is_prime(std::uint64_t p) {
  const mpz_class z(std::to_string(p));
  return mpz_probab_prime_p(z.get_mpz_t(), 30) > 0;
}

lattice::Matrix construction_a_basis(const std::vector<std::uint64_t>& a, std::uint64_t p) {
  const auto n = static_cast<Eigen::Index>(a.size());
  Eigen::Index j = 0;
  while (j < n && a[j] % p == 0) ++j;
  if (j == n) throw DomainError("construction_a_basis: congruence vector is zero mod p");
  const std::uint64_t inv = mod_inverse(a[j] % p, p);
  lattice::Matrix rows = lattice::Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i == j) {
      rows(i, j) = static_cast<double>(p);
    } else {
      rows(i, i) = 1.0;
      rows(i, j) = -static_cast<double>(mul_mod(a[i] % p, inv, p));
    }
  }
  return rows;
}

const char* base_lattice_name(BaseLattice b) {
  return b == BaseLattice::kInteger ? "integer" : "sheared";
}

std::vector<std::uint64_t> draw_congruence(const EnsembleConfig& cfg) {
  CounterRng rng = derive_trial_rng(cfg.seed, cfg.trial_index);
  std::uniform_int_distribution<std::uint64_t> coord(0, cfg.p - 1);
  std::vector<std::uint64_t> a(cfg.n);
  bool nonzero = false;
  while (!nonzero) {
    for (auto& x : a) {
      x = coord(rng);
      nonzero = nonzero || x != 0;
    }
  }
  return a;
}

lattice::Matrix construction_a_integer_basis(const EnsembleConfig& cfg) {
  if (cfg.n == 0) throw DomainError("construction A: dimension must be positive");
  if (cfg.p < 2 || !is_prime(cfg.p)) {
    throw DomainError("construction A: modulus " + std::to_string(cfg.p) + " is not prime");
  }
  if (cfg.p > (1ULL << 53)) throw DomainError("construction A: modulus above 2^53 is not exact in double");
  lattice::Matrix reduced = lattice::lll_reduce_rows(construction_a_basis(draw_congruence(cfg), cfg.p)).rows;
  return reduced.array().round().matrix();
}

lattice::Matrix draw_base_deformation(const EnsembleConfig& cfg) {
  const auto n = static_cast<Eigen::Index>(cfg.n);
  lattice::Matrix g = lattice::Matrix::Identity(n, n);
  if (cfg.base == BaseLattice::kInteger) return g;
  // Separate stream from the congruence draw.
  CounterRng rng = derive_trial_rng(mix64(cfg.seed ^ 0x5EED5EED5EED5EEDULL), cfg.trial_index);
  std::vector<double> u(cfg.n);
  double mean = 0.0;
  for (auto& x : u) {
    x = 0.5 * rng.uniform() - 0.25;
    mean += x / cfg.n;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) g(i, j) = rng.uniform() - 0.5;
  }
  for (Eigen::Index i = 0; i < n; ++i) g.row(i) *= std::exp(u[i] - mean);
  return g;
}

lattice::LatticeBasis sample_construction_a(const EnsembleConfig& cfg) {
  lattice::Matrix rows = construction_a_integer_basis(cfg);
  if (cfg.base != BaseLattice::kInteger) {
    rows = lattice::lll_reduce_rows(rows * draw_base_deformation(cfg)).rows;
  }
  rows *= std::pow(static_cast<double>(cfg.p), -1.0 / cfg.n);
  return lattice::LatticeBasis::from_rows(std::move(rows));
}

lattice::Vector sample_uniform_sphere(unsigned n, CounterRng& rng) {
  if (n == 0) throw DomainError("sample_uniform_sphere: dimension must be positive");
  std::normal_distribution<double> gauss;
  lattice::Vector v(n);
  double norm = 0.0;
  while (!(norm > 0.0)) {
    for (unsigned i = 0; i < n; ++i) v(i) = gauss(rng);
    norm = v.norm();
  }
  return v / norm;
}

}  // namespace latstat::sampler
