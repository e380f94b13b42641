#include "latstat/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "latstat/error.hpp"
#include "latstat/poisson.hpp"

namespace latstat::lattice {
namespace {

using Row = std::vector<long double>;

long double dot(const Row& a, const Row& b) {
  long double s = 0.0L;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Gram-Schmidt data of a row basis: mu[i][j] (j < i) and |b*_i|^2.
struct GramSchmidt {
  std::vector<Row> mu;
  Row bstar_sq;
  std::vector<Row> bstar;
};

// Recomputes row k of the orthogonalisation from the current b_k and the
// already computed b*_0..b*_{k-1}.
void orthogonalise_row(const std::vector<Row>& b, std::size_t k, GramSchmidt& gs) {
  Row v = b[k];
  for (std::size_t j = 0; j < k; ++j) {
    const long double m = dot(b[k], gs.bstar[j]) / gs.bstar_sq[j];
    gs.mu[k][j] = m;
    for (std::size_t c = 0; c < v.size(); ++c) v[c] -= m * gs.bstar[j][c];
  }
  gs.bstar[k] = std::move(v);
  gs.bstar_sq[k] = dot(gs.bstar[k], gs.bstar[k]);
}

GramSchmidt full_gram_schmidt(const std::vector<Row>& b) {
  const std::size_t n = b.size();
  GramSchmidt gs{std::vector<Row>(n, Row(n, 0.0L)), Row(n, 0.0L), std::vector<Row>(n)};
  for (std::size_t k = 0; k < n; ++k) orthogonalise_row(b, k, gs);
  return gs;
}

std::vector<Row> to_rows(const Matrix& m) {
  std::vector<Row> out(static_cast<std::size_t>(m.rows()), Row(static_cast<std::size_t>(m.cols())));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
  }
  return out;
}

void check_nonsingular(const Matrix& rows) {
  if (rows.rows() == 0 || rows.rows() != rows.cols()) {
    throw DegeneracyError("lattice basis must be a nonempty square matrix");
  }
  if (!rows.allFinite()) throw DegeneracyError("basis has non-finite entries");
  Eigen::FullPivLU<Matrix> lu(rows);
  lu.setThreshold(1e-13);
  if (!lu.isInvertible()) throw DegeneracyError("basis is numerically singular");
}

bool coords_less(const IntVector& a, const IntVector& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace

LatticeBasis LatticeBasis::from_rows(Matrix rows) {
  if (rows.rows() == 0 || rows.rows() != rows.cols()) {
    throw InvariantError("LatticeBasis: rows must form a nonempty square matrix");
  }
  const double det = rows.fullPivLu().determinant();
  if (!(std::abs(std::abs(det) - 1.0) <= 1e-9)) {
    throw InvariantError("LatticeBasis: covolume must be 1, got |det| = " + std::to_string(std::abs(det)));
  }
  return LatticeBasis(std::move(rows));
}

LatticeBasis LatticeBasis::normalized(Matrix rows) {
  check_nonsingular(rows);
  const double det = std::abs(rows.fullPivLu().determinant());
  rows *= std::pow(det, -1.0 / static_cast<double>(rows.rows()));
  return LatticeBasis(std::move(rows));
}

LatticeBasis LatticeBasis::identity(unsigned n) {
  return LatticeBasis(Matrix::Identity(n, n));
}

Vector LatticeBasis::embed(const IntVector& coords) const {
  const auto n = rows_.rows();
  if (static_cast<Eigen::Index>(coords.size()) != n) throw DomainError("embed: dimension mismatch");
  Vector out(n);
  for (Eigen::Index c = 0; c < n; ++c) {
    long double s = 0.0L;
    for (Eigen::Index r = 0; r < n; ++r) {
      if (coords[r] != 0) s += static_cast<long double>(coords[r]) * rows_(r, c);
    }
    out(c) = static_cast<double>(s);
  }
  return out;
}

LllResult lll_reduce_rows(const Matrix& input, double delta) {
  if (!(delta > 0.25 && delta < 1.0)) throw DomainError("lll_reduce: delta must lie in (0.25, 1)");
  check_nonsingular(input);
  const std::size_t n = static_cast<std::size_t>(input.rows());
  std::vector<Row> b = to_rows(input);
  IntMatrix u = IntMatrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  GramSchmidt gs{std::vector<Row>(n, Row(n, 0.0L)), Row(n, 0.0L), std::vector<Row>(n)};
  orthogonalise_row(b, 0, gs);

  std::size_t k = 1;
  std::size_t iterations = 0;
  while (k < n) {
    if (++iterations > 10'000'000) throw Error("lll_reduce: iteration limit reached");
    orthogonalise_row(b, k, gs);
    // Size reduction; repeat while floating-point residue leaves |mu| > 1/2.
    for (int pass = 0; pass < 64; ++pass) {
      bool changed = false;
      for (std::size_t j = k; j-- > 0;) {
        const long double q = std::nearbyint(gs.mu[k][j]);
        if (q == 0.0L) continue;
        changed = true;
        const auto qi = static_cast<std::int64_t>(q);
        for (std::size_t c = 0; c < n; ++c) b[k][c] -= q * b[j][c];
        u.row(static_cast<Eigen::Index>(k)) -= qi * u.row(static_cast<Eigen::Index>(j));
        for (std::size_t l = 0; l < j; ++l) gs.mu[k][l] -= q * gs.mu[j][l];
        gs.mu[k][j] -= q;
      }
      if (!changed) break;
      orthogonalise_row(b, k, gs);
    }
    if (gs.bstar_sq[k] <= 0.0L) throw DegeneracyError("lll_reduce: basis became singular");
    const long double m = gs.mu[k][k - 1];
    if (gs.bstar_sq[k] >= (static_cast<long double>(delta) - m * m) * gs.bstar_sq[k - 1]) {
      ++k;
    } else {
      std::swap(b[k], b[k - 1]);
      u.row(static_cast<Eigen::Index>(k)).swap(u.row(static_cast<Eigen::Index>(k - 1)));
      if (k > 1) {
        --k;
      } else {
        orthogonalise_row(b, 0, gs);
      }
    }
  }

  LllResult out;
  out.rows.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) out.rows(i, j) = static_cast<double>(b[i][j]);
  }
  out.transform = std::move(u);
  return out;
}

ReducedBasis lll_reduce(const LatticeBasis& basis, double delta) {
  LllResult r = lll_reduce_rows(basis.rows(), delta);
  // Rows are reduced images of a covolume-1 basis under a unimodular map, so
  // the determinant is preserved up to rounding.
  return ReducedBasis{LatticeBasis::from_rows(std::move(r.rows)), std::move(r.transform)};
}

bool is_lll_reduced(const Matrix& rows, double delta, double eps) {
  const GramSchmidt gs = full_gram_schmidt(to_rows(rows));
  const std::size_t n = gs.bstar_sq.size();
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (std::abs(gs.mu[i][j]) > 0.5L + eps) return false;
    }
    const long double m = gs.mu[i][i - 1];
    if (gs.bstar_sq[i] < (delta - m * m) * gs.bstar_sq[i - 1] * (1.0L - eps)) return false;
  }
  return true;
}

double radius_for_volume(double volume, unsigned n) {
  if (volume <= 0.0) return 0.0;
  return std::pow(volume / poisson::ball_volume_unit(n), 1.0 / n);
}

double volume_for_radius(double radius, unsigned n) {
  return poisson::ball_volume_unit(n) * std::pow(radius, static_cast<double>(n));
}

BallEnumerator::BallEnumerator(const LatticeBasis& basis, EnumerationOptions options)
    : basis_(basis), options_(options), n_(basis.dimension()) {
  LllResult reduced = lll_reduce_rows(basis_.rows(), options_.lll_delta);
  const GramSchmidt gs = full_gram_schmidt(to_rows(reduced.rows));
  mu_ = gs.mu;
  bstar_sq_ = gs.bstar_sq;
  transform_ = std::move(reduced.transform);
  min_row_ = reduced.rows.rowwise().norm().minCoeff();
}

double BallEnumerator::shortest_reduced_row() const { return min_row_; }

std::vector<SignNormalizedVector> BallEnumerator::within_radius(double radius) const {
  if (!(radius > 0.0)) throw DomainError("enumerate_ball: radius must be positive");
  const double expected = 0.5 * volume_for_radius(radius, n_);
  if (expected > options_.max_points) {
    throw ResourceError("enumerate_ball: about " + std::to_string(expected) +
                        " vectors expected, above the cap of " + std::to_string(options_.max_points));
  }
  const std::size_t hard_cap = static_cast<std::size_t>(std::max(4.0 * options_.max_points, 1e3));
  const long double bound = static_cast<long double>(radius) * radius * (1.0L + 1e-9L) * (1.0L + 1e-9L);
  const std::size_t n = n_;

  // Depth-first Fincke-Pohst over x_{n-1}, ..., x_0 in the reduced basis.
  // Only one vector of each +-pair is produced: while all higher
  // coefficients are zero, the current one is taken nonnegative (positive at
  // the last level).
  std::vector<IntVector> found;
  IntVector x(n, 0);
  std::vector<long double> partial(n + 1, 0.0L);  // squared length from levels >= i
  std::vector<long double> centre(n, 0.0L);
  std::vector<std::int64_t> upper(n, 0);

  auto set_level = [&](std::size_t i, bool higher_zero) -> bool {
    long double c = 0.0L;
    for (std::size_t j = i + 1; j < n; ++j) c -= mu_[j][i] * static_cast<long double>(x[j]);
    centre[i] = c;
    const long double rem = bound - partial[i + 1];
    if (rem < 0.0L) return false;
    const long double half = std::sqrt(rem / bstar_sq_[i]);
    auto lo = static_cast<std::int64_t>(std::ceil(c - half));
    const auto hi = static_cast<std::int64_t>(std::floor(c + half));
    if (higher_zero) lo = std::max<std::int64_t>(lo, i == 0 ? 1 : 0);
    if (lo > hi) return false;
    x[i] = lo;
    upper[i] = hi;
    return true;
  };

  // higher_zero[i]: all of x[i+1..n-1] are zero.
  auto higher_zero = [&](std::size_t i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (x[j] != 0) return false;
    }
    return true;
  };

  std::size_t level = n - 1;
  bool ok = set_level(level, true);
  while (true) {
    if (ok) {
      const long double d = static_cast<long double>(x[level]) - centre[level];
      const long double p = partial[level + 1] + d * d * bstar_sq_[level];
      if (p <= bound) {
        if (level == 0) {
          found.push_back(x);
          if (found.size() > hard_cap) throw ResourceError("enumerate_ball: point cap exceeded");
        } else {
          partial[level] = p;
          --level;
          ok = set_level(level, higher_zero(level));
          continue;
        }
      }
      // next candidate at this level
      if (x[level] < upper[level]) {
        ++x[level];
        continue;
      }
    }
    // backtrack
    x[level] = 0;
    ++level;
    if (level >= n) break;
    if (x[level] < upper[level]) {
      ++x[level];
      ok = true;
    } else {
      ok = false;
    }
  }

  std::vector<SignNormalizedVector> out;
  out.reserve(found.size());
  const long double r2 = static_cast<long double>(radius) * radius;
  const double unit = poisson::ball_volume_unit(n_);
  for (const IntVector& xr : found) {
    IntVector coords(n, 0);
    for (std::size_t c = 0; c < n; ++c) {
      std::int64_t s = 0;
      for (std::size_t r = 0; r < n; ++r) s += xr[r] * transform_(r, c);
      coords[c] = s;
    }
    Vector e = basis_.embed(coords);
    long double len2 = 0.0L;
    for (Eigen::Index i = 0; i < e.size(); ++i) len2 += static_cast<long double>(e(i)) * e(i);
    if (len2 > r2 || len2 == 0.0L) continue;
    const double len = static_cast<double>(std::sqrt(len2));
    for (Eigen::Index i = 0; i < e.size(); ++i) {
      if (std::abs(e(i)) > 1e-12 * len) {
        if (e(i) < 0.0) {
          e = -e;
          for (auto& c : coords) c = -c;
        }
        break;
      }
    }
    SignNormalizedVector v;
    v.coords = std::move(coords);
    v.embedding = std::move(e);
    v.length = len;
    v.nu = unit * std::pow(len, static_cast<double>(n_));
    out.push_back(std::move(v));
  }
  std::sort(out.begin(), out.end(), [](const SignNormalizedVector& a, const SignNormalizedVector& b) {
    if (a.length != b.length) return a.length < b.length;
    return coords_less(a.coords, b.coords);
  });
  return out;
}

std::vector<SignNormalizedVector> BallEnumerator::within_volume(double volume) const {
  if (!(volume > 0.0)) return {};
  return within_radius(radius_for_volume(volume, n_));
}

std::vector<SignNormalizedVector> enumerate_ball(const LatticeBasis& b, double radius,
                                                 const EnumerationOptions& options) {
  return BallEnumerator(b, options).within_radius(radius);
}

AnnulusSpec::AnnulusSpec(double s, double t) : s_(s), t_(t) {
  if (!(s >= 0.0) || !(t > s) || !std::isfinite(t)) {
    throw DomainError("annulus requires 0 <= s < t, got (" + std::to_string(s) + ", " +
                      std::to_string(t) + ")");
  }
}

void check_disjoint_sorted(const std::vector<AnnulusSpec>& annuli) {
  for (std::size_t i = 0; i + 1 < annuli.size(); ++i) {
    if (annuli[i].t() > annuli[i + 1].s()) {
      throw DomainError("annuli " + std::to_string(i) + " and " + std::to_string(i + 1) +
                        " overlap or are out of order");
    }
  }
}

std::vector<std::size_t> annulus_counts(std::span<const SignNormalizedVector> sorted_vectors,
                                        const std::vector<AnnulusSpec>& annuli) {
  check_disjoint_sorted(annuli);
  std::vector<std::size_t> counts(annuli.size(), 0);
  for (const auto& v : sorted_vectors) {
    for (std::size_t i = 0; i < annuli.size(); ++i) {
      if (annuli[i].contains(v.nu)) {
        ++counts[i];
        break;
      }
    }
  }
  return counts;
}

std::vector<std::size_t> annulus_counts(const LatticeBasis& b, const std::vector<AnnulusSpec>& annuli,
                                        const EnumerationOptions& options) {
  check_disjoint_sorted(annuli);
  if (annuli.empty()) return {};
  const auto vecs = BallEnumerator(b, options).within_volume(annuli.back().t());
  return annulus_counts(vecs, annuli);
}

std::vector<double> successive_minima(const BallEnumerator& e, unsigned k) {
  const unsigned n = e.basis().dimension();
  if (k == 0 || k > n) throw DomainError("successive_minima: requires 1 <= k <= n");
  // The reduced rows are k independent vectors, so the radius below always
  // suffices eventually; growth is in volume to keep enumeration sizes sane.
  double volume = std::max(2.0 * k + 2.0, 1.0);
  while (true) {
    const auto vecs = e.within_volume(volume);
    std::vector<IntVector> chosen;
    std::vector<double> minima;
    for (const auto& v : vecs) {
      chosen.push_back(v.coords);
      if (sieve::integer_rank(chosen) == chosen.size()) {
        minima.push_back(v.length);
        if (minima.size() == k) return minima;
      } else {
        chosen.pop_back();
      }
    }
    volume *= 2.0;
  }
}

std::vector<double> successive_minima(const LatticeBasis& b, unsigned k) {
  return successive_minima(BallEnumerator(b), k);
}

std::vector<SignNormalizedVector> shortest_vectors(const BallEnumerator& e, unsigned k, double s) {
  if (k == 0) throw DomainError("shortest_vectors: k must be positive");
  if (s < 0.0) throw DomainError("shortest_vectors: inner volume must be nonnegative");
  double width = 2.0 * k + 2.0;
  while (true) {
    auto vecs = e.within_volume(s + width);
    std::vector<SignNormalizedVector> out;
    for (auto& v : vecs) {
      if (v.nu > s) out.push_back(std::move(v));
      if (out.size() == k) return out;
    }
    width *= 2.0;
  }
}

std::vector<SignNormalizedVector> shortest_vectors(const LatticeBasis& b, unsigned k, double s) {
  return shortest_vectors(BallEnumerator(b), k, s);
}

}  // namespace latstat::lattice
