#pragma once

// Monte-Carlo experiments on Construction-A lattices, each paired with its
// analytic limit, plus the two deterministic suites (sieve verification and
// the analytics table).

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "latstat/angles.hpp"
#include "latstat/lattice.hpp"
#include "latstat/report.hpp"
#include "latstat/sampler.hpp"

namespace latstat::experiments {

// Smooth test function for the spacing statistic.
struct TestFunction {
  // "bump": exp(-1/(1-u^2)) with u = (s - centre)/width on |u| < 1.
  // "zero": identically 0.
  std::string name = "bump";
  double centre = 2.0;
  double width = 1.5;

  double operator()(double s) const;
};

struct ExperimentConfig {
  unsigned n = 10;
  std::uint64_t trials = 1000;
  std::uint64_t seed = 0;
  std::uint64_t prime = sampler::kDefaultPrime;
  sampler::BaseLattice base = sampler::BaseLattice::kSheared;
  std::vector<lattice::AnnulusSpec> annuli;
  // Target counts per annulus (joint experiment).
  std::vector<unsigned> k_values;
  std::optional<angles::ProductConstraint> angle_constraint;
  std::optional<TestFunction> test_function;
  // Tuple size for the moment experiment.
  unsigned h = 2;
  // Number of minima compared in the minima experiment.
  unsigned K = 3;
  // Moment experiment skips trials with more vectors than this.
  std::size_t max_set_size = 40;
  double max_points = 1e7;
};

// Collects every violation instead of stopping at the first.
std::vector<std::string> config_errors(const ExperimentConfig& cfg);

// Parses the JSON schema (field names as in ExperimentConfig; annuli as
// [[s, t], ...]) and appends problems to `errors`. Returns the config when
// no errors were found.
std::optional<ExperimentConfig> config_from_json(const nlohmann::json& j, std::vector<std::string>& errors);
report::Json config_to_json(const ExperimentConfig& cfg);

struct RunOptions {
  unsigned workers = 1;
  // Called after each finished trial with (done, total); may be called from
  // worker threads concurrently.
  std::function<void(std::size_t, std::size_t)> progress;
};

// Lattice of one trial.
lattice::LatticeBasis trial_lattice(const ExperimentConfig& cfg, std::uint64_t trial);

report::ExperimentReport run_count_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {});
report::ExperimentReport run_moment_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {});
report::ExperimentReport run_independence_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {});
report::ExperimentReport run_minima_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {});
report::ExperimentReport run_joint_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {});
report::ExperimentReport run_spacing_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {});

struct SieveSuiteOptions {
  unsigned max_universe = 12;
  std::uint64_t random_families = 1000;
  unsigned max_family_universe = 8;
  std::uint64_t seed = 0;
};

// Exhaustive binomial parity checks and randomized corank-family checks
// feeding the zigzag sequences into the sieve bound.
report::ExperimentReport run_sieve_verification(const SieveSuiteOptions& opts);

// Q, p and the sieve bracket over n x {0.5, 1, ..., v_max} x {1..k_max}.
report::ExperimentReport run_analytics_table(unsigned n, double v_max, unsigned k_max);

}  // namespace latstat::experiments
