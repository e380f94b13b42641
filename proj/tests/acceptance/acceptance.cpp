// Prints one PASS/FAIL line per acceptance criterion; exits nonzero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include <unistd.h>

#include <mpfr.h>

#include "latstat/angles.hpp"
#include "latstat/cli.hpp"
#include "latstat/experiments.hpp"
#include "latstat/lattice.hpp"
#include "latstat/parallel.hpp"
#include "latstat/poisson.hpp"
#include "latstat/sampler.hpp"
#include "latstat/sieve.hpp"
#include "latstat/stats.hpp"
#include "oracles.hpp"

using namespace latstat;
namespace fs = std::filesystem;
using std::numbers::pi;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double value(const report::Json& j) { return j.at("value").get<double>(); }
double stderr_of(const report::Json& j) { return j.at("stderr").get<double>(); }

unsigned workers() { return default_workers(); }

// ---- 1 ----
Outcome binomial_parity() {
  std::size_t cases = 0, bad = 0;
  for (unsigned M = 1; M <= 12; ++M)
    for (unsigned k = 1; k <= M; ++k)
      for (unsigned a = k; a <= M; ++a) {
        const mpz_class v = sieve::alternating_binomial_sum(M, k, a);
        const bool ok = (a - k) % 2 == 0 ? v >= 1 : v <= 1;
        ++cases;
        bad += ok ? 0 : 1;
      }
  return {bad == 0, fmt("%zu cases, %zu violations", cases, bad)};
}

// ---- 2 ----
Outcome corank_families() {
  std::mt19937_64 rng(2024);
  std::size_t bound_checks = 0, bad = 0;
  for (int f = 0; f < 1000; ++f) {
    const unsigned M = 1 + static_cast<unsigned>(rng() % 8);
    const unsigned dim = 2 + static_cast<unsigned>(rng() % 3);
    std::uniform_int_distribution<int> e(-2, 2);
    std::vector<sieve::IntVector> universe;
    while (universe.size() < M) {
      sieve::IntVector v(dim);
      for (auto& c : v) c = e(rng);
      if (std::all_of(v.begin(), v.end(), [](auto c) { return c == 0; })) continue;
      if (std::find(universe.begin(), universe.end(), v) != universe.end()) continue;
      universe.push_back(v);
    }
    const auto fam = sieve::corank_family_pair(universe);
    for (unsigned k = 1; k <= M; ++k) {
      const auto props = sieve::family_proportions(fam, k);
      if (!sieve::zigzag_holds(props, k)) {
        ++bad;
        continue;
      }
      const auto s = sieve::make_sieve_sequence(props, k, sieve::ZigzagMode::kSigma, props.sigma[k - 1]);
      const auto t = sieve::make_sieve_sequence(props, k, sieve::ZigzagMode::kTau, props.tau[k - 1]);
      for (unsigned a = k; a <= M; ++a) {
        ++bound_checks;
        if (!sieve::sieve_bound_check((a - k) % 2 ? s : t, M, a)) ++bad;
      }
    }
  }
  return {bad == 0, fmt("1000 families, %zu bound checks, %zu failures", bound_checks, bad)};
}

// ---- 3 ----
Outcome enumeration_oracle() {
  std::mt19937_64 rng(3);
  int mismatched = 0;
  std::size_t points = 0;
  for (int t = 0; t < 200; ++t) {
    const unsigned n = 3 + static_cast<unsigned>(t % 3);
    const auto B = oracle::random_basis(n, rng, t % 2 == 1);
    const double R = lattice::radius_for_volume(10.0 + t % 15, n);
    const auto got = lattice::enumerate_ball(lattice::LatticeBasis::from_rows(B), R);
    const auto want = oracle::grid_ball(B, R);
    points += want.size();
    bool same = got.size() == want.size();
    std::vector<bool> used(want.size(), false);
    for (const auto& v : got) {
      if (!same) break;
      bool found = false;
      for (std::size_t i = 0; i < want.size() && !found; ++i) {
        if (used[i]) continue;
        double d = 0;
        for (Eigen::Index c = 0; c < v.embedding.size(); ++c)
          d = std::max(d, std::abs(v.embedding[c] - static_cast<double>(want[i].embedding[c])));
        if (d <= 1e-9) used[i] = found = true;
      }
      same = found;
    }
    if (!same) ++mismatched;
  }
  return {mismatched == 0, fmt("200 bases, %zu points, %d mismatched sets", points, mismatched)};
}

// ---- 4 ----
Outcome analytics_identities() {
  const double lambdas[] = {0.1, 0.5, 1, 2, 5, 10};
  double worst_identity = 0;
  int trunc_bad = 0, trunc_cases = 0;
  for (double l : lambdas) {
    for (unsigned k = 0; k <= 30; ++k) {
      worst_identity = std::max(worst_identity, std::abs(poisson::poisson_right_cdf(l, k) -
                                                         poisson::poisson_right_cdf(l, k + 1) -
                                                         poisson::poisson_pmf(l, k)));
    }
    // Truncation bound, every quantity at 1024 bits.
    mpfr_t acc, term, q, tmp;
    mpfr_inits2(1024, acc, term, q, tmp, static_cast<mpfr_ptr>(nullptr));
    for (unsigned k = 1; k <= 30; ++k) {
      mpfr_set_ui(q, 1, MPFR_RNDN);
      for (unsigned j = 0; j < k; ++j) {
        mpfr_set_d(tmp, l, MPFR_RNDN);
        mpfr_pow_ui(tmp, tmp, j, MPFR_RNDN);
        mpfr_set_d(term, -l, MPFR_RNDN);
        mpfr_exp(term, term, MPFR_RNDN);
        mpfr_mul(tmp, tmp, term, MPFR_RNDN);
        mpfr_fac_ui(term, j, MPFR_RNDN);
        mpfr_div(tmp, tmp, term, MPFR_RNDN);
        mpfr_sub(q, q, tmp, MPFR_RNDN);
      }
      mpfr_set_ui(acc, 0, MPFR_RNDN);
      for (unsigned a = k; a <= 40; ++a) {
        mpfr_set_d(term, l, MPFR_RNDN);
        mpfr_pow_ui(term, term, a, MPFR_RNDN);
        mpfr_fac_ui(tmp, a, MPFR_RNDN);
        mpfr_div(term, term, tmp, MPFR_RNDN);
        mpz_class c;
        mpz_bin_uiui(c.get_mpz_t(), a - 1, k - 1);
        mpfr_mul_z(term, term, c.get_mpz_t(), MPFR_RNDN);
        if ((a - k) % 2 == 0)
          mpfr_add(acc, acc, term, MPFR_RNDN);
        else
          mpfr_sub(acc, acc, term, MPFR_RNDN);
        mpfr_sub(tmp, acc, q, MPFR_RNDN);
        mpfr_abs(tmp, tmp, MPFR_RNDN);
        ++trunc_cases;
        if (mpfr_cmp(tmp, term) > 0) ++trunc_bad;
        // The library's double evaluation against the same bound.
        double mass = 0;
        for (unsigned h = k; h <= a; ++h) mass += poisson::q_term(l, k, h);
        const double err = std::abs(poisson::truncated_q_series(l, k, a) - poisson::poisson_right_cdf(l, k));
        if (err > poisson::q_term(l, k, a) + 64 * std::numeric_limits<double>::epsilon() * (mass + 1)) ++trunc_bad;
      }
    }
    mpfr_clears(acc, term, q, tmp, static_cast<mpfr_ptr>(nullptr));
  }

  // Bracket containment on the admissible grid.
  int bracket_bad = 0, bracket_cases = 0;
  for (unsigned n : {50u, 100u})
    for (double V = 0; V <= 0.05 * n; V += 0.25)
      for (unsigned k = 1; V + k <= 0.05 * n; ++k) {
        const auto b = poisson::schmidt_bracket(n, V, k);
        const double Q = poisson::poisson_right_cdf(V / 2, k);
        ++bracket_cases;
        if (!(b.lower <= Q + 1e-12 && Q <= b.upper + 1e-12)) ++bracket_bad;
      }

  // joint_coefficient against products of exact power series.
  auto fact = [](unsigned n) {
    mpz_class r;
    mpz_fac_ui(r.get_mpz_t(), n);
    return r;
  };
  auto pmf_coeff = [&](unsigned k, unsigned deg) -> mpq_class {
    if (deg < k) return 0;
    const unsigned a = deg - k;
    return mpq_class(a % 2 ? -1 : 1) / mpq_class(fact(a) * fact(k));
  };
  auto q_coeff = [&](unsigned k, unsigned deg) -> mpq_class {
    mpq_class c = deg == 0 ? 1 : 0;
    for (unsigned j = 0; j < k; ++j) c -= pmf_coeff(j, deg);
    return c;
  };
  int coeff_bad = 0, coeff_cases = 0;
  for (unsigned d = 1; d <= 3; ++d) {
    std::vector<unsigned> k(d), a(d);
    std::function<void(unsigned, unsigned)> over_alpha = [&](unsigned i, unsigned left) {
      if (i == d) {
        mpq_class c = 1;
        unsigned total = 0;
        for (unsigned j = 0; j < d; ++j) {
          c *= j + 1 < d ? pmf_coeff(k[j], k[j] + a[j]) : q_coeff(k[j], k[j] + a[j]);
          total += a[j];
        }
        if (total % 2) c = -c;
        ++coeff_cases;
        if (poisson::joint_coefficient(k, a) != c) ++coeff_bad;
        return;
      }
      for (unsigned x = 0; x <= left; ++x) {
        a[i] = x;
        over_alpha(i + 1, left - x);
      }
    };
    std::function<void(unsigned)> over_k = [&](unsigned i) {
      if (i == d) return over_alpha(0, 6);
      for (unsigned x = i + 1 == d ? 1 : 0; x <= 3; ++x) {
        k[i] = x;
        over_k(i + 1);
      }
    };
    over_k(0);
  }
  const bool pass = worst_identity <= 1e-12 && trunc_bad == 0 && bracket_bad == 0 && coeff_bad == 0;
  return {pass, fmt("Q-p identity max err %.2e; truncation %d/%d bad; bracket %d/%d bad; coefficients %d/%d bad",
                    worst_identity, trunc_bad, trunc_cases, bracket_bad, bracket_cases, coeff_bad, coeff_cases)};
}

// ---- 5 ----
Outcome separation_identity() {
  const unsigned n = 5;
  const double s = 1.0, t = 4.0, V = t - s;
  const double U = poisson::ball_volume_unit(n);
  const double R = std::pow(t / U, 1.0 / n);
  const double box = std::pow(2 * R, 2.0 * n);
  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> ang(0, pi);
  int worst = 0;
  std::string detail;
  bool pass = true;
  for (int c = 0; c < 5; ++c) {
    double a = ang(rng), b = ang(rng);
    if (a > b) std::swap(a, b);
    angles::ProductConstraint T(2);
    T.set(1, 0, angles::IntervalSet({{a, b}}));
    const double predicted = angles::a_t_quadrature(T, n) * V * V;
    // Direct estimate of the double integral over R^5 x R^5 by uniform
    // sampling in the bounding box of the outer ball.
    auto stream = sampler::derive_trial_rng(500 + c, 0);
    const std::uint64_t samples = 100000;
    std::uint64_t hits = 0;
    for (std::uint64_t i = 0; i < samples; ++i) {
      angles::Vector x[2];
      bool inside = true;
      for (auto& v : x) {
        v.resize(n);
        for (unsigned q = 0; q < n; ++q) v[q] = R * (2 * stream.uniform() - 1);
        const double nu = U * std::pow(v.norm(), n);
        inside = inside && nu > s && nu < t;
      }
      if (!inside) continue;
      if (T.contains(angles::gram_schmidt_angles({x[0], x[1]}))) ++hits;
    }
    const double f = static_cast<double>(hits) / samples;
    const double est = box * f;
    const double se = box * stats::binomial_stderr(f, samples);
    const double z = std::abs(est - predicted) / se;
    pass = pass && z <= 3.0;
    worst = std::max(worst, static_cast<int>(std::ceil(z)));
    detail += fmt("%s[%.3f,%.3f]: %.4f vs %.4f (z=%.2f)", c ? "; " : "", a, b, est, predicted, z);
  }
  return {pass, detail};
}

// ---- 6 ----
double chi_square_p(const std::vector<double>& thetas, int e) {
  const int bins = 30;
  auto mass = [e](double lo, double hi) {
    // Closed forms for sin^e on [lo, hi] / total.
    switch (e) {
      case 0: return (hi - lo) / pi;
      case 1: return (std::cos(lo) - std::cos(hi)) / 2;
      case 2: return ((hi - lo) / 2 - (std::sin(2 * hi) - std::sin(2 * lo)) / 4) / (pi / 2);
      default: {
        auto F = [](double x) { return -std::cos(x) + std::pow(std::cos(x), 3) / 3; };
        return (F(hi) - F(lo)) / (4.0 / 3.0);
      }
    }
  };
  std::vector<double> obs(bins, 0);
  for (double th : thetas) obs[std::min(bins - 1, static_cast<int>(th / pi * bins))] += 1;
  double chi = 0;
  int used = 0;
  for (int b = 0; b < bins; ++b) {
    const double expect = thetas.size() * mass(pi * b / bins, pi * (b + 1) / bins);
    if (expect < 5) continue;
    chi += (obs[b] - expect) * (obs[b] - expect) / expect;
    ++used;
  }
  return stats::chi_square_survival(chi, used - 1);
}

Outcome exponent_oracle() {
  auto rng = sampler::derive_trial_rng(6, 0);
  std::vector<double> thetas;
  for (int i = 0; i < 100000; ++i) {
    const auto a = sampler::sample_uniform_sphere(3, rng);
    const auto b = sampler::sample_uniform_sphere(3, rng);
    thetas.push_back(angles::gram_schmidt_angles({a, b}).theta(1, 0));
  }
  const int e = angles::angle_exponent(3, 1);
  const double p_default = chi_square_p(thetas, e);
  const double p1 = chi_square_p(thetas, 1), p3 = chi_square_p(thetas, 3);
  return {e == 1 && p1 > 0.01 && p3 < 1e-6,
          fmt("exponent(3,1)=%d; p(e=1)=%.3g; p(e=3)=%.3g; p(default)=%.3g", e, p1, p3, p_default)};
}

// ---- 7, 8 ----
experiments::ExperimentConfig count_config() {
  experiments::ExperimentConfig cfg;
  cfg.n = 10;
  cfg.trials = 20000;
  cfg.seed = 1;
  cfg.annuli = {lattice::AnnulusSpec(0, 1)};
  return cfg;
}

Outcome mean_count(const report::ExperimentReport& rep) {
  const auto& m = rep.empirical().at("mean_count");
  const double dev = std::abs(value(m) - 0.5), tol = 3 * stderr_of(m) + 0.01;
  return {dev <= tol, fmt("mean %.5f +- %.5f; |mean-0.5|=%.5f <= %.5f", value(m), stderr_of(m), dev, tol)};
}

Outcome poisson_limit(const report::ExperimentReport& rep) {
  const double tv = rep.distances().at("total_variation_poisson").get<double>();
  bool pass = tv <= 0.02;
  std::string detail = fmt("TV %.5f", tv);
  const auto& emp = rep.empirical().at("tail");
  const auto& pred = rep.predicted().at("tail").at("value");
  for (std::size_t i = 0; i < emp.size(); ++i) {
    const unsigned k = emp[i].at("k").get<unsigned>();
    if (k > 4) break;
    const double e = value(emp[i]), slack = 3 * stderr_of(emp[i]) + 0.02;
    const double lo = pred[i].at("lower").get<double>(), hi = pred[i].at("upper").get<double>();
    const bool ok = e >= lo - slack && e <= hi + slack;
    pass = pass && ok;
    detail += fmt("; P(>=%u)=%.5f in [%.3f, %.3f]%s", k, e, lo - slack, hi + slack, ok ? "" : " (out)");
  }
  return {pass, detail};
}

// ---- 9 ----
Outcome minima_and_independence() {
  experiments::ExperimentConfig m;
  m.n = 10;
  m.trials = 10000;
  m.seed = 1;
  m.K = 3;
  m.annuli = {lattice::AnnulusSpec(0, 1)};
  const auto mr = experiments::run_minima_experiment(m, {workers(), {}});
  const double frac = value(mr.empirical().at("fraction_all"));

  experiments::ExperimentConfig ind;
  ind.n = 12;
  ind.trials = 20000;
  ind.seed = 1;
  ind.annuli = {lattice::AnnulusSpec(0, 0.3)};
  const auto ir = experiments::run_independence_experiment(ind, {workers(), {}});
  const double dep = value(ir.empirical().at("dependent_fraction"));
  const bool minima_ok = frac >= 0.99, indep_ok = dep <= 0.01;
  return {minima_ok && indep_ok,
          fmt("minima n=10 K=3 fraction %.4f (need >= 0.99: %s); independence n=12 V=0.3 dependent %.5f "
              "(need <= 0.01: %s)",
              frac, minima_ok ? "ok" : "no", dep, indep_ok ? "ok" : "no")};
}

// ---- 10 ----
Outcome joint_annuli() {
  experiments::ExperimentConfig cfg;
  cfg.n = 10;
  cfg.trials = 20000;
  cfg.seed = 1;
  cfg.annuli = {lattice::AnnulusSpec(0, 1), lattice::AnnulusSpec(1, 2)};
  cfg.k_values = {1, 1};
  const auto rep = experiments::run_joint_experiment(cfg, {workers(), {}});
  const auto& e = rep.empirical().at("exact_counts_probability");
  const double target = 0.25 * std::exp(-1.0);
  const double dev = std::abs(value(e) - target), tol = 3 * stderr_of(e) + 0.02;
  return {dev <= tol, fmt("empirical %.5f +- %.5f vs %.5f; tail mode %.5f vs %.5f", value(e), stderr_of(e), target,
                          value(rep.empirical().at("tail_probability")),
                          value(rep.predicted().at("tail_probability")))};
}

// ---- 11 ----
Outcome berry_tabor() {
  experiments::ExperimentConfig cfg;
  cfg.n = 12;
  cfg.trials = 2000;
  cfg.seed = 1;
  cfg.annuli = {lattice::AnnulusSpec(0, 30)};
  const auto rep = experiments::run_spacing_experiment(cfg, {workers(), {}});
  const double ks = rep.distances().at("ks_exponential").get<double>();
  const auto& m = rep.empirical().at("spacing_mean");
  const bool mean_ok = std::abs(value(m) - 2.0) <= 3 * stderr_of(m);
  return {ks <= 0.05 && mean_ok, fmt("KS %.5f (<= 0.05); spacing mean %.5f +- %.5f vs 2", ks, value(m), stderr_of(m))};
}

// ---- 12 ----
std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome reproducibility() {
  const fs::path root = fs::temp_directory_path() / ("latstat_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  const std::vector<std::vector<std::string>> runs{
      {"counts", "--n", "10", "--volume", "1", "--trials", "2000", "--seed", "42"},
      {"joint", "--n", "8", "--volume", "0:1", "--volume", "1:2", "--k", "1", "--k", "1", "--trials", "1000",
       "--seed", "7"},
      {"sieve-verify", "--max-universe", "8", "--families", "50", "--seed", "3"},
  };
  bool pass = true;
  std::string detail;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    std::string first;
    for (int rep = 0; rep < 2; ++rep) {
      const fs::path out = root / (std::to_string(r) + "_" + std::to_string(rep));
      std::vector<std::string> argv{"latstat"};
      argv.insert(argv.end(), runs[r].begin(), runs[r].end());
      argv.insert(argv.end(), {"--out", out.string()});
      if (runs[r][0] != "sieve-verify") argv.insert(argv.end(), {"--workers", rep ? "2" : "1"});
      const int code = cli::dispatch(argv);
      const std::string body = slurp(out / "report.json");
      if (code != 0 || body.empty()) pass = false;
      if (rep == 0)
        first = body;
      else if (body != first)
        pass = false;
    }
    detail += fmt("%s%s %s", r ? "; " : "", runs[r][0].c_str(), pass ? "identical" : "differs");
  }
  fs::remove_all(root);
  return {pass, detail};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit_seconds;
    std::function<Outcome()> run;
  };
  // 7 and 8 share one run; its time counts against criterion 7.
  std::optional<report::ExperimentReport> counts;
  auto count_run = [&]() -> const report::ExperimentReport& {
    if (!counts) counts = experiments::run_count_experiment(count_config(), {workers(), {}});
    return *counts;
  };
  const std::vector<Criterion> criteria{
      {1, "sieve exactness", 5, binomial_parity},
      {2, "zigzag end-to-end", 60, corank_families},
      {3, "enumeration oracle", 60, enumeration_oracle},
      {4, "analytics identities", 10, analytics_identities},
      {5, "separation identity", 300, separation_identity},
      {6, "exponent oracle", 60, exponent_oracle},
      {7, "mean count", 600, [&] { return mean_count(count_run()); }},
      {8, "Poisson count limit", 600, [&] { return poisson_limit(count_run()); }},
      {9, "minima and independence", 900, minima_and_independence},
      {10, "joint annuli", 600, joint_annuli},
      {11, "spacing statistics", 1200, berry_tabor},
      {12, "reproducibility", 600, reproducibility},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.limit_seconds;
    const bool pass = o.pass && in_time;
    failures += pass ? 0 : 1;
    std::printf("%s %2d %s: %s [%.1fs / %.0fs]\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs,
                c.limit_seconds);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
