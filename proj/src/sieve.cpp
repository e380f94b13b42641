#include "latstat/sieve.hpp"

#include <algorithm>
#include <bit>
#include <set>
#include <sstream>
#include <string>

#include "latstat/error.hpp"

namespace latstat::sieve {
namespace {

mpz_class binomial(unsigned n, unsigned k) {
  mpz_class r;
  mpz_bin_uiui(r.get_mpz_t(), n, k);
  return r;
}

std::string describe(Subset s) {
  std::ostringstream os;
  os << '{';
  bool first = true;
  for (unsigned p = 0; p < 32; ++p) {
    if (s & (Subset{1} << p)) {
      os << (first ? "" : ",") << p;
      first = false;
    }
  }
  os << '}';
  return os.str();
}

// sum_{h=k}^{bound} (-1)^{h-k} C(h-1,k-1) C(M,h) x_h
mpq_class weighted_alternating_sum(const ZigzagSequence& seq, unsigned M, unsigned bound) {
  const unsigned k = seq.k();
  mpq_class total = 0;
  for (unsigned h = k; h <= bound; ++h) {
    mpz_class w = binomial(h - 1, k - 1) * binomial(M, h);
    if ((h - k) % 2 == 1) w = -w;
    total += mpq_class(w) * seq.at(h);
  }
  return total;
}

}  // namespace

mpz_class alternating_binomial_sum(unsigned M, unsigned k, unsigned alpha) {
  if (k == 0) throw DomainError("alternating_binomial_sum: k must be positive");
  if (M < k) throw DomainError("alternating_binomial_sum: requires M >= k");
  if (alpha < k) throw DomainError("alternating_binomial_sum: requires alpha >= k");
  mpz_class total = 0;
  for (unsigned h = k; h <= alpha; ++h) {
    const mpz_class term = binomial(h - 1, k - 1) * binomial(M, h);
    if ((h - k) % 2 == 0) {
      total += term;
    } else {
      total -= term;
    }
  }
  return total;
}

ZigzagSequence::ZigzagSequence(unsigned k, std::vector<mpq_class> values, ZigzagMode mode)
    : k_(k), values_(std::move(values)), mode_(mode) {
  if (k_ == 0) throw InvariantError("ZigzagSequence: k must be positive");
  if (values_.empty()) throw InvariantError("ZigzagSequence: needs at least the value at k-1");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (values_[i] < 0 || values_[i] > 1) {
      throw InvariantError("ZigzagSequence: value at index " + std::to_string(k_ - 1 + i) +
                           " outside [0,1]");
    }
  }
  // values_[i] holds index k-1+i. A step from k+2t-1 to k+2t (even i) goes
  // down in sigma mode; from k+2t to k+2t+1 (odd i) goes up.
  for (std::size_t i = 0; i + 1 < values_.size(); ++i) {
    const bool down_step = (i % 2 == 0) == (mode_ == ZigzagMode::kSigma);
    const bool ok = down_step ? values_[i] >= values_[i + 1] : values_[i] <= values_[i + 1];
    if (!ok) {
      throw InvariantError("ZigzagSequence: alternation broken between indices " +
                           std::to_string(k_ - 1 + i) + " and " + std::to_string(k_ + i));
    }
  }
}

const mpq_class& ZigzagSequence::at(unsigned h) const {
  if (h + 1 < k_ || h > top()) throw DomainError("ZigzagSequence: index out of range");
  return values_[h - (k_ - 1)];
}

bool sieve_bound_check(const ZigzagSequence& seq, unsigned M, unsigned bound) {
  const unsigned k = seq.k();
  if (bound < k) throw DomainError("sieve_bound_check: bound must be >= k");
  const bool odd = (bound - k) % 2 == 1;
  if (seq.mode() == ZigzagMode::kSigma && !odd) {
    throw DomainError("sieve_bound_check: sigma mode requires alpha-k odd");
  }
  if (seq.mode() == ZigzagMode::kTau && odd) {
    throw DomainError("sieve_bound_check: tau mode requires beta-k even");
  }
  if (bound > seq.top()) throw DomainError("sieve_bound_check: sequence does not reach the bound");
  const mpq_class lhs = weighted_alternating_sum(seq, M, bound);
  const mpq_class& anchor = seq.at(k - 1);
  return seq.mode() == ZigzagMode::kSigma ? lhs <= anchor : lhs >= anchor;
}

void SubsetFamilyPair::validate() const {
  const unsigned M = universe_size;
  if (M > kMaxUniverse) throw InvariantError("SubsetFamilyPair: universe too large");
  if (A.size() != M + 1 || A_prime.size() != M + 1) {
    throw InvariantError("SubsetFamilyPair: expected families for cardinalities 0..M");
  }
  const Subset full = M == 32 ? ~Subset{0} : ((Subset{1} << M) - 1);
  std::vector<std::set<Subset>> a(M + 1), ap(M + 1);
  for (unsigned i = 0; i <= M; ++i) {
    for (Subset s : A[i]) {
      if ((s & ~full) != 0 || static_cast<unsigned>(std::popcount(s)) != i) {
        throw InvariantError("SubsetFamilyPair: A_" + std::to_string(i) + " holds " + describe(s) +
                             " of wrong cardinality or outside the universe");
      }
      if (!a[i].insert(s).second) {
        throw InvariantError("SubsetFamilyPair: A_" + std::to_string(i) + " lists " + describe(s) +
                             " twice");
      }
    }
    for (Subset s : A_prime[i]) {
      if ((s & ~full) != 0 || static_cast<unsigned>(std::popcount(s)) != i) {
        throw InvariantError("SubsetFamilyPair: A'_" + std::to_string(i) + " holds " +
                             describe(s) + " of wrong cardinality or outside the universe");
      }
      if (!ap[i].insert(s).second) {
        throw InvariantError("SubsetFamilyPair: A'_" + std::to_string(i) + " lists " +
                             describe(s) + " twice");
      }
    }
  }
  for (unsigned i = 1; i <= M; ++i) {
    for (Subset e : a[i]) {
      for (unsigned p = 0; p < M; ++p) {
        const Subset bit = Subset{1} << p;
        if ((e & bit) && !a[i - 1].contains(e & ~bit)) {
          throw InvariantError("SubsetFamilyPair: downward closure fails: " + describe(e) +
                               " in A_" + std::to_string(i) + " but " + describe(e & ~bit) +
                               " not in A_" + std::to_string(i - 1));
        }
      }
    }
    for (Subset f : a[i - 1]) {
      for (unsigned p = 0; p < M; ++p) {
        const Subset bit = Subset{1} << p;
        if (!(f & bit) && !ap[i].contains(f | bit)) {
          throw InvariantError("SubsetFamilyPair: upward generation fails: " + describe(f) +
                               " in A_" + std::to_string(i - 1) + " but " + describe(f | bit) +
                               " not in A'_" + std::to_string(i));
        }
      }
    }
  }
}

FamilyProportions family_proportions(const SubsetFamilyPair& fam, unsigned parity_origin) {
  fam.validate();
  const unsigned M = fam.universe_size;
  FamilyProportions out;
  out.sigma.resize(M + 1);
  out.tau.resize(M + 1);
  for (unsigned i = 0; i <= M; ++i) {
    const mpz_class total = binomial(M, i);
    const mpq_class a(mpz_class(fam.A[i].size()), total);
    const mpq_class ap(mpz_class(fam.A_prime[i].size()), total);
    // parity relative to the origin; the sign of (i - origin) is irrelevant.
    const bool even = (i + parity_origin) % 2 == 0;
    out.sigma[i] = even ? a : ap;
    out.tau[i] = even ? ap : a;
    out.sigma[i].canonicalize();
    out.tau[i].canonicalize();
  }
  return out;
}

bool zigzag_holds(const FamilyProportions& props, unsigned parity_origin) {
  const std::size_t size = props.sigma.size();
  for (std::size_t i = parity_origin; i + 1 < size; ++i) {
    const bool up = (i - parity_origin) % 2 == 0;
    if (up) {
      if (!(props.sigma[i] <= props.sigma[i + 1])) return false;
      if (!(props.tau[i] >= props.tau[i + 1])) return false;
    } else {
      if (!(props.sigma[i] >= props.sigma[i + 1])) return false;
      if (!(props.tau[i] <= props.tau[i + 1])) return false;
    }
  }
  return true;
}

ZigzagSequence make_sieve_sequence(const FamilyProportions& props, unsigned k, ZigzagMode mode,
                                   const mpq_class& anchor) {
  const auto& src = mode == ZigzagMode::kSigma ? props.sigma : props.tau;
  if (k == 0 || k >= src.size()) throw DomainError("make_sieve_sequence: k outside 1..M");
  std::vector<mpq_class> values;
  values.reserve(src.size() - k + 1);
  values.push_back(anchor);
  for (std::size_t h = k; h < src.size(); ++h) values.push_back(src[h]);
  return ZigzagSequence(k, std::move(values), mode);
}

CoordinateTuple::CoordinateTuple(std::vector<IntVector> vectors) : vectors_(std::move(vectors)) {
  for (std::size_t i = 0; i < vectors_.size(); ++i) {
    const auto& v = vectors_[i];
    if (v.size() != vectors_.front().size()) {
      throw InvariantError("CoordinateTuple: vectors of different dimensions");
    }
    if (std::all_of(v.begin(), v.end(), [](std::int64_t c) { return c == 0; })) {
      throw InvariantError("CoordinateTuple: vector " + std::to_string(i) + " is zero");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (vectors_[j] == v) {
        throw InvariantError("CoordinateTuple: vectors " + std::to_string(j) + " and " +
                             std::to_string(i) + " coincide");
      }
    }
  }
}

std::size_t integer_rank(std::span<const IntVector> rows) {
  if (rows.empty()) return 0;
  const std::size_t r = rows.size();
  const std::size_t c = rows.front().size();
  std::vector<std::vector<mpz_class>> m(r, std::vector<mpz_class>(c));
  for (std::size_t i = 0; i < r; ++i) {
    if (rows[i].size() != c) throw InvariantError("integer_rank: ragged rows");
    for (std::size_t j = 0; j < c; ++j) m[i][j] = static_cast<long>(rows[i][j]);
  }
  mpz_class prev = 1;
  std::size_t rank = 0;
  for (std::size_t col = 0; col < c && rank < r; ++col) {
    std::size_t pivot = rank;
    while (pivot < r && m[pivot][col] == 0) ++pivot;
    if (pivot == r) continue;
    std::swap(m[pivot], m[rank]);
    for (std::size_t i = rank + 1; i < r; ++i) {
      for (std::size_t j = col + 1; j < c; ++j) {
        mpz_class v = m[rank][col] * m[i][j] - m[i][col] * m[rank][j];
        mpz_divexact(m[i][j].get_mpz_t(), v.get_mpz_t(), prev.get_mpz_t());
      }
      m[i][col] = 0;
    }
    prev = m[rank][col];
    ++rank;
  }
  return rank;
}

std::size_t corank(const CoordinateTuple& t) {
  return t.size() - integer_rank(t.vectors());
}

SubsetFamilyPair corank_family_pair(std::span<const IntVector> universe,
                                    std::span<const IntVector> anchor) {
  const auto M = static_cast<unsigned>(universe.size());
  if (M > kMaxUniverse) throw DomainError("corank_family_pair: universe too large");
  SubsetFamilyPair fam;
  fam.universe_size = M;
  fam.A.resize(M + 1);
  fam.A_prime.resize(M + 1);
  std::vector<IntVector> rows(anchor.begin(), anchor.end());
  const std::size_t base = rows.size();
  for (Subset s = 0; s < (Subset{1} << M); ++s) {
    rows.resize(base);
    for (unsigned p = 0; p < M; ++p) {
      if (s & (Subset{1} << p)) rows.push_back(universe[p]);
    }
    const std::size_t cr = rows.size() - integer_rank(rows);
    const auto card = static_cast<unsigned>(std::popcount(s));
    if (cr == 0) fam.A[card].push_back(s);
    if (cr <= 1) fam.A_prime[card].push_back(s);
  }
  return fam;
}

}  // namespace latstat::sieve
