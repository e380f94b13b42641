#include "latstat/angles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "latstat/error.hpp"
#include "latstat/parallel.hpp"
#include "latstat/sampler.hpp"

namespace latstat::angles {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::uint64_t kBlock = 4096;

double clamp_angle(double x) { return std::clamp(x, 0.0, kPi); }

double sin_power_integral(int e, double a, double b) {
  if (b <= a) return 0.0;
  if (e == 0) return b - a;
  auto f = [e](double x) { return std::pow(std::sin(x), e); };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 20, 1e-13);
}

// Integral of sin^e over [0, pi].
double sin_power_total(int e) {
  return std::sqrt(kPi) * std::exp(std::lgamma(0.5 * (e + 1)) - std::lgamma(0.5 * e + 1.0));
}

}  // namespace

AngleMatrix gram_schmidt_angles(const std::vector<Vector>& x) {
  if (x.empty()) throw DomainError("gram_schmidt_angles: empty tuple");
  const auto n = x.front().size();
  const auto N = static_cast<unsigned>(x.size());
  for (const auto& v : x) {
    if (v.size() != n) throw DomainError("gram_schmidt_angles: vectors of different dimension");
  }
  if (N > n) throw DomainError("gram_schmidt_angles: more vectors than dimensions");

  AngleMatrix m;
  m.N = N;
  m.theta = Matrix::Zero(N, N);
  m.phi = Matrix::Zero(N, N);
  m.r.resize(N);
  std::vector<Vector> unit_star(N);  // x*_j / |x*_j|
  for (unsigned i = 0; i < N; ++i) {
    m.r(i) = x[i].norm();
    Vector rest = x[i];  // x_i projected away from x*_0..x*_{j-1}
    for (unsigned j = 0; j < i; ++j) {
      const double mu = rest.dot(unit_star[j]);
      rest -= mu * unit_star[j];
      m.theta(i, j) = std::atan2(rest.norm(), mu);
    }
    const double star = rest.norm();
    if (!(star >= 1e-10 * m.r(i))) {
      throw DegeneracyError("gram_schmidt_angles: vector " + std::to_string(i + 1) +
                            " is numerically dependent on the previous ones");
    }
    unit_star[i] = rest / star;
  }
  for (unsigned i = 0; i < N; ++i) {
    for (unsigned j = 0; j < i; ++j) {
      const double c = x[i].dot(x[j]) / (m.r(i) * m.r(j));
      m.phi(i, j) = m.phi(j, i) = std::acos(std::clamp(c, -1.0, 1.0));
    }
  }
  return m;
}

Matrix mu_from_angles(const AngleMatrix& m) {
  Matrix mu = Matrix::Zero(m.N, m.N);
  for (unsigned i = 0; i < m.N; ++i) {
    double scale = m.r(i);
    for (unsigned j = 0; j < i; ++j) {
      mu(i, j) = scale * std::cos(m.theta(i, j));
      scale *= std::sin(m.theta(i, j));
    }
  }
  return mu;
}

Matrix normalized_angles(const AngleMatrix& m, unsigned n) {
  Matrix t = Matrix::Zero(m.N, m.N);
  const double root = std::sqrt(static_cast<double>(n));
  for (unsigned i = 0; i < m.N; ++i) {
    for (unsigned j = 0; j < i; ++j) t(i, j) = root * (0.5 * kPi - m.theta(i, j));
  }
  return t;
}

int angle_exponent(unsigned n, unsigned j, ExponentConvention conv) {
  if (j < 1 || j >= n) throw DomainError("angle_exponent: requires 1 <= j < n");
  const int base = static_cast<int>(n) - static_cast<int>(j);
  return conv == ExponentConvention::kSphere ? base - 1 : base + 1;
}

IntervalSet::IntervalSet(std::vector<std::pair<double, double>> pieces) {
  for (auto& [a, b] : pieces) {
    if (std::isnan(a) || std::isnan(b) || a > b) {
      throw DomainError("interval [" + std::to_string(a) + ", " + std::to_string(b) + "] is malformed");
    }
    a = clamp_angle(a);
    b = clamp_angle(b);
  }
  std::sort(pieces.begin(), pieces.end());
  for (const auto& [a, b] : pieces) {
    if (!pieces_.empty() && a <= pieces_.back().second) {
      pieces_.back().second = std::max(pieces_.back().second, b);
    } else {
      pieces_.emplace_back(a, b);
    }
  }
}

IntervalSet IntervalSet::full() { return IntervalSet({{0.0, kPi}}); }

bool IntervalSet::is_full() const {
  return pieces_.size() == 1 && pieces_[0].first == 0.0 && pieces_[0].second == kPi;
}

bool IntervalSet::contains(double theta) const {
  for (const auto& [a, b] : pieces_) {
    if (theta >= a && theta <= b) return true;
  }
  return false;
}

IntervalSet IntervalSet::reflected() const {
  std::vector<std::pair<double, double>> out;
  out.reserve(pieces_.size());
  for (const auto& [a, b] : pieces_) out.emplace_back(kPi - b, kPi - a);
  return IntervalSet(std::move(out));
}

IntervalSet IntervalSet::united(const IntervalSet& other) const {
  auto all = pieces_;
  all.insert(all.end(), other.pieces_.begin(), other.pieces_.end());
  return IntervalSet(std::move(all));
}

bool IntervalSet::subset_of(const IntervalSet& other, double tol) const {
  for (const auto& [a, b] : pieces_) {
    const bool covered = std::any_of(other.pieces_.begin(), other.pieces_.end(), [&](const auto& p) {
      return p.first <= a + tol && b <= p.second + tol;
    });
    if (!covered) return false;
  }
  return true;
}

bool IntervalSet::approx_equal(const IntervalSet& other, double tol) const {
  if (pieces_.size() != other.pieces_.size()) return false;
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    if (std::abs(pieces_[i].first - other.pieces_[i].first) > tol ||
        std::abs(pieces_[i].second - other.pieces_[i].second) > tol) {
      return false;
    }
  }
  return true;
}

ProductConstraint::ProductConstraint(unsigned N)
    : N_(N), sets_(static_cast<std::size_t>(N) * (N > 0 ? N - 1 : 0) / 2, IntervalSet::full()) {}

std::size_t ProductConstraint::index(unsigned i, unsigned j) const {
  if (!(j < i && i < N_)) {
    throw DomainError("angle pair (" + std::to_string(i + 1) + ", " + std::to_string(j + 1) +
                      ") outside 1 <= j < i <= " + std::to_string(N_));
  }
  return static_cast<std::size_t>(i) * (i - 1) / 2 + j;
}

const IntervalSet& ProductConstraint::at(unsigned i, unsigned j) const { return sets_[index(i, j)]; }

void ProductConstraint::set(unsigned i, unsigned j, IntervalSet s) { sets_[index(i, j)] = std::move(s); }

bool ProductConstraint::empty() const {
  return std::any_of(sets_.begin(), sets_.end(), [](const IntervalSet& s) { return s.empty(); });
}

bool ProductConstraint::is_full() const {
  return std::all_of(sets_.begin(), sets_.end(), [](const IntervalSet& s) { return s.is_full(); });
}

bool ProductConstraint::contains(const AngleMatrix& m) const {
  if (m.N != N_) throw DomainError("ProductConstraint: tuple length mismatch");
  for (unsigned i = 1; i < N_; ++i) {
    for (unsigned j = 0; j < i; ++j) {
      if (!at(i, j).contains(m.theta(i, j))) return false;
    }
  }
  return true;
}

bool ProductConstraint::subset_of(const ProductConstraint& other) const {
  if (other.N_ != N_) return false;
  if (empty()) return true;
  for (std::size_t p = 0; p < sets_.size(); ++p) {
    if (!sets_[p].subset_of(other.sets_[p])) return false;
  }
  return true;
}

bool ProductConstraint::approx_equal(const ProductConstraint& other, double tol) const {
  if (other.N_ != N_) return false;
  for (std::size_t p = 0; p < sets_.size(); ++p) {
    if (!sets_[p].approx_equal(other.sets_[p], tol)) return false;
  }
  return true;
}

nlohmann::ordered_json ProductConstraint::to_json() const {
  nlohmann::ordered_json out;
  out["N"] = N_;
  auto pairs = nlohmann::ordered_json::array();
  for (unsigned i = 1; i < N_; ++i) {
    for (unsigned j = 0; j < i; ++j) {
      const IntervalSet& s = at(i, j);
      if (s.is_full()) continue;
      nlohmann::ordered_json p;
      p["i"] = i + 1;
      p["j"] = j + 1;
      auto iv = nlohmann::ordered_json::array();
      for (const auto& [a, b] : s.pieces()) iv.push_back({a, b});
      p["intervals"] = iv;
      pairs.push_back(p);
    }
  }
  out["pairs"] = pairs;
  return out;
}

ProductConstraint ProductConstraint::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("N") || !j["N"].is_number_unsigned()) {
    throw ConfigError("angle constraint: expected an object with unsigned field \"N\"");
  }
  ProductConstraint T(j["N"].get<unsigned>());
  if (!j.contains("pairs")) return T;
  if (!j["pairs"].is_array()) throw ConfigError("angle constraint: \"pairs\" must be an array");
  for (const auto& p : j["pairs"]) {
    if (!p.contains("i") || !p.contains("j") || !p.contains("intervals")) {
      throw ConfigError("angle constraint: each pair needs \"i\", \"j\" and \"intervals\"");
    }
    const auto i = p["i"].get<unsigned>();
    const auto jj = p["j"].get<unsigned>();
    if (jj < 1 || i <= jj || i > T.N()) {
      throw ConfigError("angle constraint: pair (" + std::to_string(i) + ", " + std::to_string(jj) +
                        ") needs 1 <= j < i <= N");
    }
    std::vector<std::pair<double, double>> pieces;
    for (const auto& iv : p["intervals"]) {
      if (!iv.is_array() || iv.size() != 2) throw ConfigError("angle constraint: intervals are [a, b] pairs");
      pieces.emplace_back(iv[0].get<double>(), iv[1].get<double>());
    }
    try {
      T.set(i - 1, jj - 1, IntervalSet(std::move(pieces)));
    } catch (const DomainError& e) {
      throw ConfigError(std::string("angle constraint: ") + e.what());
    }
  }
  return T;
}

double a_t_quadrature(const ProductConstraint& T, unsigned n, ExponentConvention conv) {
  if (T.N() >= n) throw DomainError("a_t_quadrature: requires N <= n - 1");
  double prod = 1.0;
  for (unsigned i = 1; i < T.N(); ++i) {
    for (unsigned j = 0; j < i; ++j) {
      const IntervalSet& s = T.at(i, j);
      if (s.is_full()) continue;
      const int e = angle_exponent(n, j + 1, conv);
      double part = 0.0;
      for (const auto& [a, b] : s.pieces()) part += sin_power_integral(e, a, b);
      prod *= std::min(1.0, part / sin_power_total(e));
    }
  }
  return prod;
}

MonteCarloEstimate a_t_monte_carlo(const AnglePredicate& pred, unsigned N, unsigned n,
                                   std::uint64_t samples, std::uint64_t seed, unsigned workers) {
  if (samples < 100) throw DomainError("a_t_monte_carlo: needs at least 100 samples");
  if (N == 0 || N > n) throw DomainError("a_t_monte_carlo: requires 1 <= N <= n");
  const std::uint64_t blocks = (samples + kBlock - 1) / kBlock;
  const auto counts = parallel_map(blocks, workers, [&](std::size_t b) {
    sampler::CounterRng rng = sampler::derive_trial_rng(seed, b);
    const std::uint64_t begin = b * kBlock;
    const std::uint64_t end = std::min(samples, begin + kBlock);
    std::uint64_t hits = 0;
    std::vector<Vector> x(N);
    for (std::uint64_t s = begin; s < end; ++s) {
      for (int attempt = 0;; ++attempt) {
        for (auto& v : x) v = sampler::sample_uniform_sphere(n, rng);
        try {
          if (pred(gram_schmidt_angles(x))) ++hits;
          break;
        } catch (const DegeneracyError&) {
          if (attempt + 1 >= 10) throw;
        }
      }
    }
    return hits;
  });
  MonteCarloEstimate out;
  out.samples = samples;
  for (auto h : counts) out.hits += h;
  const double p = static_cast<double>(out.hits) / static_cast<double>(samples);
  out.estimate = p;
  out.stderr_estimate = std::sqrt(p * (1.0 - p) / static_cast<double>(samples));
  return out;
}

MonteCarloEstimate a_t_monte_carlo(const ProductConstraint& T, unsigned n, std::uint64_t samples,
                                   std::uint64_t seed, unsigned workers) {
  return a_t_monte_carlo([&T](const AngleMatrix& m) { return T.contains(m); }, T.N(), n, samples, seed,
                         workers);
}

ProductConstraint symmetrize_constraint(const ProductConstraint& T) {
  ProductConstraint out(T.N());
  for (unsigned i = 1; i < T.N(); ++i) {
    for (unsigned j = 0; j < i; ++j) {
      const IntervalSet& s = T.at(i, j);
      out.set(i, j, s.united(s.reflected()));
    }
  }
  return out;
}

bool is_centrally_symmetric(const ProductConstraint& T, double tol) {
  if (T.empty()) return true;
  for (unsigned flip = 0; flip < T.N(); ++flip) {
    for (unsigned i = 1; i < T.N(); ++i) {
      for (unsigned j = 0; j < i; ++j) {
        if (i != flip && j != flip) continue;
        if (!T.at(i, j).reflected().approx_equal(T.at(i, j), tol)) return false;
      }
    }
  }
  return true;
}

}  // namespace latstat::angles
