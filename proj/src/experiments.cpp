#include "latstat/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "latstat/error.hpp"
#include "latstat/parallel.hpp"
#include "latstat/poisson.hpp"
#include "latstat/sieve.hpp"
#include "latstat/stats.hpp"

#ifndef LATSTAT_VERSION
#define LATSTAT_VERSION "unknown"
#endif

namespace latstat::experiments {
namespace {

using report::ExperimentReport;
using report::format_number;
using report::Json;

constexpr const char* kRefPoisson = "Rogers Poisson limit: counts in a set of volume V tend to Poisson(V/2)";
constexpr const char* kRefSiegel = "Siegel mean value: E|L cap S'| = V/2";
constexpr const char* kRefRogersMoment = "Rogers moment: independent h-tuples have mean (V/2)^h/h!";
constexpr const char* kRefCorank = "corank-1 excess bound (V/2)^(h-1)/(h-1)! (3^h (3/4)^(n/2) + 5^h 2^-n)";
constexpr const char* kRefSchmidt = "Schmidt sieve bracket with explicit corank-1 error sums";
constexpr const char* kRefIndependence = "short vectors are linearly independent with probability 1 - O(e^-cn)";
constexpr const char* kRefMinima = "k-th shortest vector realizes the k-th successive minimum with probability 1 - O(e^-dn)";
constexpr const char* kRefJoint = "joint annulus law: A(T) times Poisson factors per annulus";
constexpr const char* kRefBerryTabor = "Berry-Tabor exponential spacing: Exponential(1/2) gaps in the nu coordinate";

std::string bool_str(bool b) { return b ? "true" : "false"; }

Json provenance(const ExperimentConfig& cfg) {
  Json p;
  p["config"] = config_to_json(cfg);
  p["seed"] = cfg.seed;
  p["ensemble"] = Json{{"name", "construction-A"},
                       {"prime", cfg.prime},
                       {"base_lattice", sampler::base_lattice_name(cfg.base)},
                       {"scaling", "p^(-1/n)"},
                       {"reduction", "LLL delta=0.99"},
                       {"note", "finite-p surrogate for the Haar-random unimodular lattice"}};
  p["code_version"] = LATSTAT_VERSION;
  return p;
}

void require_valid(const ExperimentConfig& cfg) {
  const auto errors = config_errors(cfg);
  if (errors.empty()) return;
  std::string msg = "invalid experiment config:";
  for (const auto& e : errors) msg += "\n  " + e;
  throw DomainError(msg);
}

const lattice::AnnulusSpec& single_annulus(const ExperimentConfig& cfg, const char* who) {
  if (cfg.annuli.size() != 1) {
    throw DomainError(std::string(who) + ": exactly one annulus is required, got " +
                      std::to_string(cfg.annuli.size()));
  }
  return cfg.annuli.front();
}

template <typename Fn>
auto run_trials(const ExperimentConfig& cfg, const RunOptions& opts, Fn&& fn) {
  std::function<void(std::size_t)> done;
  if (opts.progress) done = [&](std::size_t d) { opts.progress(d, cfg.trials); };
  return parallel_map(
      cfg.trials, opts.workers,
      [&](std::size_t i) {
        try {
          return fn(i);
        } catch (const ResourceError& e) {
          throw ResourceError("trial " + std::to_string(i) + ": " + e.what());
        }
      },
      done);
}

lattice::EnumerationOptions enum_options(const ExperimentConfig& cfg) {
  lattice::EnumerationOptions o;
  o.max_points = cfg.max_points;
  return o;
}

std::vector<lattice::SignNormalizedVector> vectors_in(const std::vector<lattice::SignNormalizedVector>& all,
                                                      const lattice::AnnulusSpec& a) {
  std::vector<lattice::SignNormalizedVector> out;
  for (const auto& v : all) {
    if (a.contains(v.nu)) out.push_back(v);
  }
  return out;
}

}  // namespace

double TestFunction::operator()(double s) const {
  if (name == "zero") return 0.0;
  const double u = (s - centre) / width;
  if (std::abs(u) >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - u * u));
}

std::vector<std::string> config_errors(const ExperimentConfig& cfg) {
  std::vector<std::string> errors;
  if (cfg.n < 2) errors.push_back("n: dimension must be at least 2");
  if (cfg.n > 40) errors.push_back("n: dimension above 40 is beyond exhaustive enumeration");
  if (cfg.trials == 0) errors.push_back("trials: must be positive");
  if (cfg.prime < 2 || !sampler::is_prime(cfg.prime)) {
    errors.push_back("prime: " + std::to_string(cfg.prime) + " is not prime");
  } else if (cfg.prime > (1ULL << 53)) {
    errors.push_back("prime: must not exceed 2^53");
  }
  for (std::size_t i = 0; i + 1 < cfg.annuli.size(); ++i) {
    if (cfg.annuli[i].t() > cfg.annuli[i + 1].s()) {
      errors.push_back("annuli: annulus " + std::to_string(i) + " (" + format_number(cfg.annuli[i].s()) + ":" +
                       format_number(cfg.annuli[i].t()) + ") and annulus " + std::to_string(i + 1) + " (" +
                       format_number(cfg.annuli[i + 1].s()) + ":" + format_number(cfg.annuli[i + 1].t()) +
                       ") overlap or are out of order");
    }
  }
  unsigned total = 0;
  for (unsigned k : cfg.k_values) total += k;
  if (cfg.angle_constraint) {
    if (total + 1 > cfg.n) {
      errors.push_back("k_values: angle statistics need N = sum of k_values <= n - 1 (N = " +
                       std::to_string(total) + ", n = " + std::to_string(cfg.n) + ")");
    }
    if (cfg.angle_constraint->N() != total) {
      errors.push_back("angle_constraint: N = " + std::to_string(cfg.angle_constraint->N()) +
                       " differs from the sum of k_values (" + std::to_string(total) + ")");
    }
  }
  if (!cfg.k_values.empty() && cfg.k_values.size() != cfg.annuli.size()) {
    errors.push_back("k_values: need one target count per annulus");
  }
  if (cfg.test_function) {
    const auto& f = *cfg.test_function;
    if (f.name != "bump" && f.name != "zero") {
      errors.push_back("test_function.name: unknown function \"" + f.name + "\" (bump, zero)");
    } else if (f.name == "bump" && !(f.width > 0.0 && f.centre - f.width > 0.0)) {
      errors.push_back("test_function: bump support (centre - width, centre + width) must lie in (0, inf)");
    }
  }
  if (cfg.h == 0 || cfg.h >= cfg.n) errors.push_back("h: requires 1 <= h < n");
  if (cfg.K == 0 || cfg.K > cfg.n) errors.push_back("K: requires 1 <= K <= n");
  if (!(cfg.max_points > 0.0)) errors.push_back("max_points: must be positive");
  return errors;
}

std::optional<ExperimentConfig> config_from_json(const nlohmann::json& j, std::vector<std::string>& errors) {
  const std::size_t before = errors.size();
  if (!j.is_object()) {
    errors.push_back("config: top level must be an object");
    return std::nullopt;
  }
  ExperimentConfig cfg;
  static const std::set<std::string> known = {"n",  "trials", "seed", "prime", "base_lattice", "annuli",     "k_values",
                                              "angle_constraint", "test_function", "h", "K", "max_set_size",
                                              "max_points"};
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) errors.push_back(key + ": unknown field");
  }
  auto get_unsigned = [&](const char* key, auto& out) {
    if (!j.contains(key)) return;
    if (!j[key].is_number_unsigned()) {
      errors.push_back(std::string(key) + ": expected a nonnegative integer");
      return;
    }
    out = j[key].get<std::decay_t<decltype(out)>>();
  };
  get_unsigned("n", cfg.n);
  get_unsigned("trials", cfg.trials);
  get_unsigned("seed", cfg.seed);
  get_unsigned("prime", cfg.prime);
  get_unsigned("h", cfg.h);
  get_unsigned("K", cfg.K);
  get_unsigned("max_set_size", cfg.max_set_size);
  if (j.contains("base_lattice")) {
    const auto& b = j["base_lattice"];
    if (b == "integer") {
      cfg.base = sampler::BaseLattice::kInteger;
    } else if (b == "sheared") {
      cfg.base = sampler::BaseLattice::kSheared;
    } else {
      errors.push_back("base_lattice: expected \"sheared\" or \"integer\"");
    }
  }
  if (j.contains("max_points")) {
    if (j["max_points"].is_number()) {
      cfg.max_points = j["max_points"].get<double>();
    } else {
      errors.push_back("max_points: expected a number");
    }
  }
  if (j.contains("annuli")) {
    if (!j["annuli"].is_array()) {
      errors.push_back("annuli: expected an array of [s, t] pairs");
    } else {
      std::size_t idx = 0;
      for (const auto& a : j["annuli"]) {
        if (!a.is_array() || a.size() != 2 || !a[0].is_number() || !a[1].is_number()) {
          errors.push_back("annuli[" + std::to_string(idx) + "]: expected [s, t]");
        } else {
          try {
            cfg.annuli.emplace_back(a[0].get<double>(), a[1].get<double>());
          } catch (const DomainError& e) {
            errors.push_back("annuli[" + std::to_string(idx) + "]: " + e.what());
          }
        }
        ++idx;
      }
    }
  }
  if (j.contains("k_values")) {
    if (!j["k_values"].is_array()) {
      errors.push_back("k_values: expected an array of nonnegative integers");
    } else {
      for (const auto& k : j["k_values"]) {
        if (!k.is_number_unsigned()) {
          errors.push_back("k_values: entries must be nonnegative integers");
          break;
        }
        cfg.k_values.push_back(k.get<unsigned>());
      }
    }
  }
  if (j.contains("angle_constraint") && !j["angle_constraint"].is_null()) {
    try {
      cfg.angle_constraint = angles::ProductConstraint::from_json(j["angle_constraint"]);
    } catch (const Error& e) {
      errors.push_back(e.what());
    } catch (const nlohmann::json::exception& e) {
      errors.push_back(std::string("angle_constraint: ") + e.what());
    }
  }
  if (j.contains("test_function") && !j["test_function"].is_null()) {
    const auto& f = j["test_function"];
    TestFunction tf;
    if (!f.is_object()) {
      errors.push_back("test_function: expected an object");
    } else {
      if (f.contains("name")) tf.name = f["name"].is_string() ? f["name"].get<std::string>() : "";
      if (f.contains("centre")) tf.centre = f["centre"].is_number() ? f["centre"].get<double>() : NAN;
      if (f.contains("width")) tf.width = f["width"].is_number() ? f["width"].get<double>() : NAN;
      cfg.test_function = tf;
    }
  }
  for (auto& e : config_errors(cfg)) errors.push_back(std::move(e));
  if (errors.size() != before) return std::nullopt;
  return cfg;
}

Json config_to_json(const ExperimentConfig& cfg) {
  Json j;
  j["n"] = cfg.n;
  j["trials"] = cfg.trials;
  j["seed"] = cfg.seed;
  j["prime"] = cfg.prime;
  j["base_lattice"] = sampler::base_lattice_name(cfg.base);
  auto annuli = Json::array();
  for (const auto& a : cfg.annuli) annuli.push_back({a.s(), a.t()});
  j["annuli"] = annuli;
  j["k_values"] = cfg.k_values;
  j["angle_constraint"] = cfg.angle_constraint ? cfg.angle_constraint->to_json() : Json(nullptr);
  if (cfg.test_function) {
    j["test_function"] = Json{{"name", cfg.test_function->name},
                              {"centre", cfg.test_function->centre},
                              {"width", cfg.test_function->width}};
  } else {
    j["test_function"] = nullptr;
  }
  j["h"] = cfg.h;
  j["K"] = cfg.K;
  j["max_set_size"] = cfg.max_set_size;
  j["max_points"] = cfg.max_points;
  return j;
}

lattice::LatticeBasis trial_lattice(const ExperimentConfig& cfg, std::uint64_t trial) {
  return sampler::sample_construction_a({cfg.n, cfg.prime, cfg.seed, trial, cfg.base});
}

ExperimentReport run_count_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
  require_valid(cfg);
  const auto& annulus = single_annulus(cfg, "count experiment");
  const double V = annulus.volume();
  const double lambda = 0.5 * V;

  const auto counts = run_trials(cfg, opts, [&](std::size_t i) {
    return static_cast<unsigned>(lattice::annulus_counts(trial_lattice(cfg, i), {annulus}, enum_options(cfg))[0]);
  });

  ExperimentReport rep("counts");
  rep.provenance() = provenance(cfg);
  const auto pmf = stats::empirical_pmf(counts);
  const unsigned max_count = static_cast<unsigned>(pmf.size()) - 1;
  std::vector<double> as_double(counts.begin(), counts.end());
  const auto summary = stats::summarize(as_double);
  rep.add_empirical("mean_count", summary.mean, summary.stderr_mean);
  rep.add_predicted("mean_count", lambda, kRefSiegel);

  unsigned support = std::max(max_count, 1u);
  while (poisson::poisson_right_cdf(lambda, support + 1) > 1e-16 && support < 2000) ++support;
  std::vector<double> predicted(support + 1);
  for (unsigned k = 0; k <= support; ++k) predicted[k] = poisson::poisson_pmf(lambda, k);

  auto& pmf_table = rep.table("pmf", {"k", "empirical_pmf", "empirical_stderr", "poisson_pmf"});
  Json emp_pmf = Json::array();
  for (unsigned k = 0; k <= support; ++k) {
    const double e = k < pmf.size() ? pmf[k] : 0.0;
    const double se = stats::binomial_stderr(e, cfg.trials);
    emp_pmf.push_back(Json{{"k", k}, {"value", e}, {"stderr", se}});
    pmf_table.add_row({format_number(std::uint64_t{k}), format_number(e), format_number(se),
                       format_number(predicted[k])});
  }
  rep.add_empirical("pmf", emp_pmf);
  rep.add_predicted("pmf", Json(predicted), kRefPoisson);

  const double tv = stats::total_variation(pmf, predicted, poisson::poisson_right_cdf(lambda, support + 1));
  rep.add_distance("total_variation_poisson", tv);

  // Tail probabilities from the pmf so that P(count >= k) = 1 - sum_{j<k} pmf_j exactly.
  auto& tail_table = rep.table("tail", {"k", "empirical_tail", "empirical_stderr", "poisson_q", "bracket_lower",
                                        "bracket_upper", "main_lower", "main_upper", "error_term",
                                        "in_proven_range"});
  Json emp_tail = Json::array();
  Json pred_tail = Json::array();
  double below = 0.0;
  const unsigned k_top = std::min(cfg.n - 2, std::max(4u, max_count + 1));
  for (unsigned k = 0; k <= k_top; ++k) {
    const double tail = 1.0 - below;
    below += k < pmf.size() ? pmf[k] : 0.0;
    if (k == 0) continue;
    const double se = stats::binomial_stderr(tail, cfg.trials);
    const double q = poisson::poisson_right_cdf(lambda, k);
    const auto b = poisson::schmidt_bracket(cfg.n, V, k);
    emp_tail.push_back(Json{{"k", k}, {"value", tail}, {"stderr", se}});
    pred_tail.push_back(Json{{"k", k},
                             {"poisson_q", q},
                             {"lower", b.lower},
                             {"upper", b.upper},
                             {"main_term", b.main_term},
                             {"main_lower", b.main_lower},
                             {"main_upper", b.main_upper},
                             {"error_term", b.error_term},
                             {"in_proven_range", b.in_proven_range}});
    tail_table.add_row({format_number(std::uint64_t{k}), format_number(tail), format_number(se), format_number(q),
                        format_number(b.lower), format_number(b.upper), format_number(b.main_lower),
                        format_number(b.main_upper), format_number(b.error_term), bool_str(b.in_proven_range)});
  }
  rep.add_empirical("tail", emp_tail);
  rep.add_predicted("tail", pred_tail, kRefSchmidt);

  rep.add_check("mean_count", std::abs(summary.mean - lambda) <= 3.0 * summary.stderr_mean + 0.01,
                "|mean - V/2| <= 3 stderr + 0.01");
  rep.add_check("total_variation", tv <= 0.02, "TV(empirical, Poisson(V/2)) <= 0.02");
  return rep;
}

ExperimentReport run_moment_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
  require_valid(cfg);
  const auto& annulus = single_annulus(cfg, "moment experiment");
  const double V = annulus.volume();
  const unsigned h = cfg.h;

  struct Trial {
    bool skipped = false;
    double independent = 0.0;
    double corank_le1 = 0.0;
  };
  const auto trials = run_trials(cfg, opts, [&](std::size_t i) {
    Trial t;
    lattice::BallEnumerator e(trial_lattice(cfg, i), enum_options(cfg));
    const auto vecs = vectors_in(e.within_volume(annulus.t()), annulus);
    if (vecs.size() > cfg.max_set_size) {
      t.skipped = true;
      return t;
    }
    if (vecs.size() < h) return t;
    std::vector<bool> pick(vecs.size(), false);
    std::fill(pick.begin(), pick.begin() + h, true);
    std::vector<sieve::IntVector> tuple;
    do {
      tuple.clear();
      for (std::size_t q = 0; q < vecs.size(); ++q) {
        if (pick[q]) tuple.push_back(vecs[q].coords);
      }
      const std::size_t rank = sieve::integer_rank(tuple);
      if (rank == h) t.independent += 1.0;
      if (rank + 1 >= h) t.corank_le1 += 1.0;
    } while (std::prev_permutation(pick.begin(), pick.end()));
    return t;
  });

  std::vector<double> indep, le1, excess;
  std::uint64_t skipped = 0;
  for (const auto& t : trials) {
    if (t.skipped) {
      ++skipped;
      continue;
    }
    indep.push_back(t.independent);
    le1.push_back(t.corank_le1);
    excess.push_back(t.corank_le1 - t.independent);
  }
  ExperimentReport rep("moments");
  rep.provenance() = provenance(cfg);
  rep.provenance()["skipped_trials"] = skipped;
  rep.provenance()["max_set_size"] = cfg.max_set_size;
  if (indep.empty()) throw ResourceError("moment experiment: every trial exceeded max_set_size");
  const auto si = stats::summarize(indep);
  const auto sl = stats::summarize(le1);
  const auto sx = stats::summarize(excess);
  const double predicted = std::exp(h * std::log(0.5 * V) - std::lgamma(h + 1.0));
  const double bound = poisson::corank1_error_term(cfg.n, V, h);
  rep.add_empirical("independent_tuples_mean", si.mean, si.stderr_mean);
  rep.add_empirical("corank_le1_tuples_mean", sl.mean, sl.stderr_mean);
  rep.add_empirical("corank1_excess_mean", sx.mean, sx.stderr_mean);
  rep.add_empirical("skipped_trials", Json(skipped));
  rep.add_predicted("independent_tuples_mean", predicted, kRefRogersMoment);
  rep.add_predicted("corank1_excess_bound", bound, kRefCorank);
  auto& table = rep.table("moments", {"statistic", "empirical", "stderr", "predicted"});
  table.add_row({"independent_tuples_mean", format_number(si.mean), format_number(si.stderr_mean),
                 format_number(predicted)});
  table.add_row({"corank_le1_tuples_mean", format_number(sl.mean), format_number(sl.stderr_mean), ""});
  table.add_row({"corank1_excess_mean", format_number(sx.mean), format_number(sx.stderr_mean), format_number(bound)});
  rep.add_check("independent_mean", std::abs(si.mean - predicted) <= 3.0 * si.stderr_mean + 0.02,
                "|mean - (V/2)^h/h!| <= 3 stderr + 0.02");
  rep.add_check("corank1_excess", sx.mean <= bound + 3.0 * sx.stderr_mean, "excess mean <= bound + 3 stderr");
  return rep;
}

ExperimentReport run_independence_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
  require_valid(cfg);
  const auto& annulus = single_annulus(cfg, "independence experiment");
  const auto flags = run_trials(cfg, opts, [&](std::size_t i) {
    lattice::BallEnumerator e(trial_lattice(cfg, i), enum_options(cfg));
    const auto vecs = vectors_in(e.within_volume(annulus.t()), annulus);
    std::vector<sieve::IntVector> coords;
    for (const auto& v : vecs) coords.push_back(v.coords);
    return static_cast<int>(sieve::integer_rank(coords) < coords.size());
  });
  std::uint64_t dependent = 0;
  for (int f : flags) dependent += static_cast<std::uint64_t>(f);
  const double frac = static_cast<double>(dependent) / static_cast<double>(cfg.trials);
  const auto ci = stats::wilson_interval(dependent, cfg.trials);

  ExperimentReport rep("independence");
  rep.provenance() = provenance(cfg);
  rep.add_empirical("dependent_fraction",
                    Json{{"value", frac},
                         {"stderr", stats::binomial_stderr(frac, cfg.trials)},
                         {"wilson_lower", ci.lower},
                         {"wilson_upper", ci.upper},
                         {"dependent_trials", dependent}});
  rep.add_predicted("dependent_fraction_scale", annulus.volume() * std::exp(-0.7 * cfg.n), kRefIndependence);
  auto& table = rep.table("independence", {"trials", "dependent", "fraction", "wilson_lower", "wilson_upper"});
  table.add_row({format_number(cfg.trials), format_number(dependent), format_number(frac), format_number(ci.lower),
                 format_number(ci.upper)});
  return rep;
}

ExperimentReport run_minima_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
  require_valid(cfg);
  const unsigned K = cfg.K;
  const auto matches = run_trials(cfg, opts, [&](std::size_t i) {
    lattice::BallEnumerator e(trial_lattice(cfg, i), enum_options(cfg));
    const auto sv = lattice::shortest_vectors(e, K, 0.0);
    const auto minima = lattice::successive_minima(e, K);
    std::vector<int> m(K);
    for (unsigned k = 0; k < K; ++k) m[k] = std::abs(sv[k].length - minima[k]) <= 1e-9 ? 1 : 0;
    return m;
  });
  std::vector<std::uint64_t> per_k(K, 0);
  std::uint64_t all = 0;
  for (const auto& m : matches) {
    bool every = true;
    for (unsigned k = 0; k < K; ++k) {
      per_k[k] += static_cast<std::uint64_t>(m[k]);
      every = every && m[k];
    }
    all += every ? 1 : 0;
  }
  ExperimentReport rep("minima");
  rep.provenance() = provenance(cfg);
  auto& table = rep.table("minima", {"k", "matches", "fraction", "stderr"});
  Json per = Json::array();
  const double trials = static_cast<double>(cfg.trials);
  for (unsigned k = 0; k < K; ++k) {
    const double f = static_cast<double>(per_k[k]) / trials;
    const double se = stats::binomial_stderr(f, cfg.trials);
    per.push_back(Json{{"k", k + 1}, {"matches", per_k[k]}, {"value", f}, {"stderr", se}});
    table.add_row({format_number(std::uint64_t{k + 1}), format_number(per_k[k]), format_number(f), format_number(se)});
  }
  const double f_all = static_cast<double>(all) / trials;
  table.add_row({"all", format_number(all), format_number(f_all), format_number(stats::binomial_stderr(f_all, cfg.trials))});
  rep.add_empirical("per_k", per);
  rep.add_empirical("fraction_all", f_all, stats::binomial_stderr(f_all, cfg.trials));
  rep.add_predicted("fraction_all", 1.0, kRefMinima);
  const std::uint64_t min_k = *std::min_element(per_k.begin(), per_k.end());
  rep.add_check("per_k_consistency", all <= min_k, "all-k matches never exceed any per-k match count");
  return rep;
}

ExperimentReport run_joint_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
  require_valid(cfg);
  if (cfg.annuli.empty()) throw DomainError("joint experiment: at least one annulus is required");
  if (cfg.k_values.size() != cfg.annuli.size()) throw DomainError("joint experiment: one target count per annulus");
  unsigned N = 0;
  for (unsigned a : cfg.k_values) N += a;
  if (N >= cfg.n) {
    throw DomainError("joint experiment: sum of target counts (" + std::to_string(N) + ") must be below n = " +
                      std::to_string(cfg.n));
  }
  const std::size_t d = cfg.annuli.size();
  const angles::ProductConstraint T = cfg.angle_constraint.value_or(angles::ProductConstraint(N));

  struct Trial {
    int exact = 0;
    int tail = 0;
    int degenerate = 0;
  };
  const auto trials = run_trials(cfg, opts, [&](std::size_t i) {
    Trial t;
    lattice::BallEnumerator e(trial_lattice(cfg, i), enum_options(cfg));
    const auto all = e.within_volume(cfg.annuli.back().t());
    std::vector<std::vector<const lattice::SignNormalizedVector*>> per(d);
    for (const auto& v : all) {
      for (std::size_t a = 0; a < d; ++a) {
        if (cfg.annuli[a].contains(v.nu)) {
          per[a].push_back(&v);
          break;
        }
      }
    }
    bool head = true;
    for (std::size_t a = 0; a + 1 < d; ++a) head = head && per[a].size() == cfg.k_values[a];
    const bool exact = head && per[d - 1].size() == cfg.k_values[d - 1];
    const bool tail = head && per[d - 1].size() >= cfg.k_values[d - 1];
    auto angles_ok = [&]() {
      if (T.is_full() || N == 0) return true;
      if (T.empty()) return false;
      std::vector<angles::Vector> x;
      for (std::size_t a = 0; a < d; ++a) {
        for (unsigned q = 0; q < cfg.k_values[a]; ++q) x.push_back(per[a][q]->embedding);
      }
      try {
        return T.contains(angles::gram_schmidt_angles(x));
      } catch (const DegeneracyError&) {
        t.degenerate = 1;
        return false;
      }
    };
    if (tail && angles_ok()) {
      t.tail = 1;
      t.exact = exact ? 1 : 0;
    }
    return t;
  });

  std::uint64_t exact = 0, tail = 0, degenerate = 0;
  for (const auto& t : trials) {
    exact += static_cast<std::uint64_t>(t.exact);
    tail += static_cast<std::uint64_t>(t.tail);
    degenerate += static_cast<std::uint64_t>(t.degenerate);
  }
  poisson::AnnulusProfile profile;
  for (std::size_t a = 0; a < d; ++a) {
    profile.volumes.push_back(cfg.annuli[a].volume());
    profile.counts.push_back(cfg.k_values[a]);
  }
  const double a_t = N >= 2 ? angles::a_t_quadrature(T, cfg.n) : 1.0;
  const double pred_exact = a_t * poisson::joint_exact_count_term(profile);
  const double pred_tail = a_t * poisson::joint_main_term(profile);
  const double trials_d = static_cast<double>(cfg.trials);
  const double f_exact = static_cast<double>(exact) / trials_d;
  const double f_tail = static_cast<double>(tail) / trials_d;
  const double se_exact = stats::binomial_stderr(f_exact, cfg.trials);
  const double se_tail = stats::binomial_stderr(f_tail, cfg.trials);

  ExperimentReport rep("joint");
  rep.provenance() = provenance(cfg);
  rep.add_empirical("exact_counts_probability", f_exact, se_exact);
  rep.add_empirical("tail_probability", f_tail, se_tail);
  rep.add_empirical("degenerate_tuples", Json(degenerate));
  rep.add_predicted("a_t", a_t, "A(T): uniform-sphere probability of the Gram-Schmidt angle constraints");
  rep.add_predicted("exact_counts_probability", pred_exact, kRefJoint);
  rep.add_predicted("tail_probability", pred_tail, kRefJoint);
  rep.add_predicted("angle_constraint_centrally_symmetric", Json(angles::is_centrally_symmetric(T)),
                    "the joint law requires a centrally symmetric T");
  auto& table = rep.table("joint", {"mode", "empirical", "stderr", "predicted", "a_t"});
  table.add_row({"exact", format_number(f_exact), format_number(se_exact), format_number(pred_exact), format_number(a_t)});
  table.add_row({"tail", format_number(f_tail), format_number(se_tail), format_number(pred_tail), format_number(a_t)});
  rep.add_check("exact_counts_probability", std::abs(f_exact - pred_exact) <= 3.0 * se_exact + 0.02,
                "|empirical - predicted| <= 3 stderr + 0.02");
  return rep;
}

ExperimentReport run_spacing_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
  require_valid(cfg);
  const auto& annulus = single_annulus(cfg, "spacing experiment");
  const TestFunction h = cfg.test_function.value_or(TestFunction{});
  const double half_v = 0.5 * annulus.volume();

  struct Trial {
    std::vector<double> gaps;
    double statistic = 0.0;
  };
  const auto trials = run_trials(cfg, opts, [&](std::size_t i) {
    lattice::BallEnumerator e(trial_lattice(cfg, i), enum_options(cfg));
    double extra = 8.0;
    std::vector<lattice::SignNormalizedVector> vecs;
    while (true) {
      vecs = e.within_volume(annulus.t() + extra);
      if (!vecs.empty() && vecs.back().nu >= annulus.t()) break;
      extra *= 2.0;
    }
    Trial t;
    for (std::size_t q = 0; q + 1 < vecs.size(); ++q) {
      if (!annulus.contains(vecs[q].nu)) continue;
      const double gap = vecs[q + 1].nu - vecs[q].nu;
      t.gaps.push_back(gap);
      t.statistic += h(gap);
    }
    t.statistic /= half_v;
    return t;
  });

  std::vector<double> pooled, deviations, statistics;
  std::uint64_t none = 0, fewer_than_two = 0;
  for (const auto& t : trials) {
    pooled.insert(pooled.end(), t.gaps.begin(), t.gaps.end());
    none += t.gaps.empty() ? 1 : 0;
    fewer_than_two += t.gaps.size() < 2 ? 1 : 0;
    statistics.push_back(t.statistic);
  }
  double integral = 0.0;
  if (h.name == "bump") {
    integral = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [&](double s) { return 0.5 * std::exp(-0.5 * s) * h(s); }, h.centre - h.width, h.centre + h.width, 20,
        1e-13);
  }
  for (double s : statistics) deviations.push_back(std::abs(s - integral));

  ExperimentReport rep("spacing");
  rep.provenance() = provenance(cfg);
  rep.add_empirical("trials_without_vectors", Json(none));
  rep.add_empirical("trials_with_fewer_than_two_vectors", Json(fewer_than_two));
  rep.add_empirical("spacing_count", Json(static_cast<std::uint64_t>(pooled.size())));
  if (pooled.empty()) throw DomainError("spacing experiment: no vector fell in the annulus in any trial");
  const auto sm = stats::summarize(pooled);
  const auto sd = stats::summarize(deviations);
  const auto ss = stats::summarize(statistics);
  const double ks = stats::ks_statistic(pooled, [](double s) { return s <= 0.0 ? 0.0 : -std::expm1(-0.5 * s); });
  rep.add_empirical("spacing_mean", sm.mean, sm.stderr_mean);
  rep.add_empirical("bt_statistic_mean", ss.mean, ss.stderr_mean);
  rep.add_empirical("bt_abs_deviation_mean", sd.mean, sd.stderr_mean);
  rep.add_predicted("spacing_mean", 2.0, kRefBerryTabor);
  rep.add_predicted("bt_integral", integral, kRefBerryTabor);
  rep.add_distance("ks_exponential", ks);

  auto& hist = rep.table("spacing_histogram", {"bin_lower", "bin_upper", "empirical_density", "exponential_density"});
  const double width = 0.5;
  const double n_pooled = static_cast<double>(pooled.size());
  for (int b = 0; b < 24; ++b) {
    const double lo = b * width, hi = lo + width;
    const auto in_bin = std::count_if(pooled.begin(), pooled.end(), [&](double g) { return g >= lo && g < hi; });
    const double emp = static_cast<double>(in_bin) / (n_pooled * width);
    const double ref = (std::exp(-0.5 * lo) - std::exp(-0.5 * hi)) / width;
    hist.add_row({format_number(lo), format_number(hi), format_number(emp), format_number(ref)});
  }
  auto& summary = rep.table("spacing_summary", {"statistic", "value", "stderr", "predicted"});
  summary.add_row({"spacing_mean", format_number(sm.mean), format_number(sm.stderr_mean), "2"});
  summary.add_row({"ks_exponential", format_number(ks), "", "0"});
  summary.add_row({"bt_statistic_mean", format_number(ss.mean), format_number(ss.stderr_mean), format_number(integral)});
  summary.add_row({"bt_abs_deviation_mean", format_number(sd.mean), format_number(sd.stderr_mean), ""});
  rep.add_check("spacing_mean", std::abs(sm.mean - 2.0) <= 3.0 * sm.stderr_mean, "|mean - 2| <= 3 stderr");
  return rep;
}

ExperimentReport run_sieve_verification(const SieveSuiteOptions& opts) {
  if (opts.max_universe == 0 || opts.max_universe > 30) throw DomainError("sieve verification: max_universe in 1..30");
  if (opts.max_family_universe == 0 || opts.max_family_universe > sieve::kMaxUniverse) {
    throw DomainError("sieve verification: family universe must be in 1.." + std::to_string(sieve::kMaxUniverse));
  }
  ExperimentReport rep("sieve-verify");
  auto& table = rep.table("sieve", {"check", "cases", "failures"});

  std::uint64_t binom_cases = 0, binom_fail = 0;
  for (unsigned M = 1; M <= opts.max_universe; ++M) {
    for (unsigned k = 1; k <= M; ++k) {
      for (unsigned alpha = k; alpha <= M; ++alpha) {
        const mpz_class v = sieve::alternating_binomial_sum(M, k, alpha);
        const bool ok = (alpha - k) % 2 == 0 ? v >= 1 : v <= 1;
        ++binom_cases;
        binom_fail += ok ? 0 : 1;
      }
    }
  }

  std::uint64_t families = 0, zigzag_fail = 0, bound_cases = 0, bound_fail = 0;
  for (std::uint64_t r = 0; r < opts.random_families; ++r) {
    sampler::CounterRng rng = sampler::derive_trial_rng(opts.seed, r);
    const unsigned M = 1 + static_cast<unsigned>(rng() % opts.max_family_universe);
    const unsigned dim = 2 + static_cast<unsigned>(rng() % 3);
    std::uniform_int_distribution<int> entry(-2, 2);
    auto draw = [&] {
      sieve::IntVector v(dim, 0);
      while (std::all_of(v.begin(), v.end(), [](std::int64_t c) { return c == 0; })) {
        for (auto& c : v) c = entry(rng);
      }
      return v;
    };
    std::vector<sieve::IntVector> universe;
    while (universe.size() < M) {
      auto v = draw();
      if (std::find(universe.begin(), universe.end(), v) == universe.end()) universe.push_back(std::move(v));
    }
    std::vector<sieve::IntVector> anchor;
    if (rng() % 2 == 0) anchor.push_back(draw());
    const auto fam = sieve::corank_family_pair(universe, anchor);
    ++families;
    bool fam_ok = true;
    for (unsigned k = 1; k <= M; ++k) {
      const auto props = sieve::family_proportions(fam, k);
      if (!sieve::zigzag_holds(props, k)) fam_ok = false;
      try {
        const auto sigma = sieve::make_sieve_sequence(props, k, sieve::ZigzagMode::kSigma, props.sigma[k - 1]);
        const auto tau = sieve::make_sieve_sequence(props, k, sieve::ZigzagMode::kTau, props.tau[k - 1]);
        for (unsigned a = k; a <= M; ++a) {
          const auto& seq = (a - k) % 2 == 1 ? sigma : tau;
          ++bound_cases;
          if (!sieve::sieve_bound_check(seq, M, a)) ++bound_fail;
        }
      } catch (const InvariantError&) {
        fam_ok = false;
      }
    }
    zigzag_fail += fam_ok ? 0 : 1;
  }

  table.add_row({"alternating_binomial_parity", format_number(binom_cases), format_number(binom_fail)});
  table.add_row({"corank_family_zigzag", format_number(families), format_number(zigzag_fail)});
  table.add_row({"sieve_bound", format_number(bound_cases), format_number(bound_fail)});
  rep.add_empirical("alternating_binomial_parity", Json{{"cases", binom_cases}, {"failures", binom_fail}});
  rep.add_empirical("corank_family_zigzag", Json{{"cases", families}, {"failures", zigzag_fail}});
  rep.add_empirical("sieve_bound", Json{{"cases", bound_cases}, {"failures", bound_fail}});
  rep.add_check("alternating_binomial_parity", binom_fail == 0, "sum >= 1 for even alpha-k, <= 1 for odd");
  rep.add_check("corank_family_zigzag", zigzag_fail == 0, "proportions alternate from index k-1");
  rep.add_check("sieve_bound", bound_fail == 0, "weighted alternating sums respect the anchor");
  rep.provenance() = Json{{"max_universe", opts.max_universe},
                          {"random_families", opts.random_families},
                          {"max_family_universe", opts.max_family_universe},
                          {"seed", opts.seed},
                          {"code_version", LATSTAT_VERSION}};
  return rep;
}

ExperimentReport run_analytics_table(unsigned n, double v_max, unsigned k_max) {
  if (n < 3) throw DomainError("analytics table: n must be at least 3");
  if (!(v_max >= 0.0)) throw DomainError("analytics table: v_max must be nonnegative");
  if (k_max == 0) throw DomainError("analytics table: k_max must be positive");
  ExperimentReport rep("analytics-table");
  auto& table = rep.table("analytics", {"n", "V", "k", "poisson_pmf", "poisson_q", "main_term", "error_term",
                                        "bracket_lower", "bracket_upper", "in_proven_range"});
  std::uint64_t rows = 0;
  for (int step = 0; 0.5 * step <= v_max + 1e-12; ++step) {
    const double V = 0.5 * step;
    for (unsigned k = 1; k <= k_max && k + 1 < n; ++k) {
      const auto b = poisson::schmidt_bracket(n, V, k);
      table.add_row({format_number(std::uint64_t{n}), format_number(V), format_number(std::uint64_t{k}),
                     format_number(poisson::poisson_pmf(0.5 * V, k)), format_number(poisson::poisson_right_cdf(0.5 * V, k)),
                     format_number(b.main_term), format_number(b.error_term), format_number(b.lower),
                     format_number(b.upper), bool_str(b.in_proven_range)});
      ++rows;
    }
  }
  rep.add_empirical("rows", Json(rows));
  rep.provenance() = Json{{"n", n}, {"v_max", v_max}, {"k_max", k_max}, {"code_version", LATSTAT_VERSION}};
  return rep;
}

}  // namespace latstat::experiments
