#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "latstat/error.hpp"
#include "latstat/experiments.hpp"
#include "latstat/poisson.hpp"

using namespace latstat;
using namespace latstat::experiments;
using lattice::AnnulusSpec;

namespace {

ExperimentConfig small(double V, std::uint64_t trials = 400) {
  ExperimentConfig cfg;
  cfg.n = 6;
  cfg.trials = trials;
  cfg.seed = 17;
  cfg.annuli = {AnnulusSpec(0, V)};
  return cfg;
}

double value(const report::Json& j) { return j.at("value").get<double>(); }

}  // namespace

TEST(Config, Errors) {
  ExperimentConfig cfg = small(1);
  EXPECT_TRUE(config_errors(cfg).empty());
  cfg.annuli = {AnnulusSpec(0, 2), AnnulusSpec(1, 3)};
  cfg.prime = 12;
  cfg.trials = 0;
  const auto errs = config_errors(cfg);
  EXPECT_GE(errs.size(), 3u);
  bool overlap = false;
  for (const auto& e : errs) overlap = overlap || (e.find("(0:2)") != std::string::npos && e.find("(1:3)") != std::string::npos);
  EXPECT_TRUE(overlap);
  EXPECT_THROW(AnnulusSpec(1, 1), DomainError);
}

TEST(Config, ConstraintSizeRule) {
  ExperimentConfig cfg = small(1);
  cfg.annuli = {AnnulusSpec(0, 1), AnnulusSpec(1, 2)};
  cfg.k_values = {3, 3};
  cfg.angle_constraint = angles::ProductConstraint(6);
  const auto errs = config_errors(cfg);
  ASSERT_FALSE(errs.empty());
  bool cites = false;
  for (const auto& e : errs) cites = cites || e.find("n-1") != std::string::npos || e.find("n - 1") != std::string::npos;
  EXPECT_TRUE(cites);
}

TEST(Config, JsonRoundTrip) {
  ExperimentConfig cfg = small(1.5);
  cfg.k_values = {2};
  cfg.test_function = TestFunction{};
  const auto j = config_to_json(cfg);
  std::vector<std::string> errors;
  const auto back = config_from_json(j, errors);
  ASSERT_TRUE(back.has_value()) << (errors.empty() ? "" : errors.front());
  EXPECT_EQ(config_to_json(*back), j);
  errors.clear();
  auto bad = j;
  bad["bogus"] = 1;
  EXPECT_FALSE(config_from_json(bad, errors).has_value());
  EXPECT_FALSE(errors.empty());
}

TEST(CountExperiment, TailIsComplementOfPmf) {
  const auto rep = run_count_experiment(small(2));
  const auto& pmf = rep.empirical().at("pmf");
  double below = 0;
  std::size_t idx = 0;
  for (const auto& t : rep.empirical().at("tail")) {
    const unsigned k = t.at("k").get<unsigned>();
    while (idx < pmf.size() && pmf[idx].at("k").get<unsigned>() < k) below += value(pmf[idx++]);
    EXPECT_EQ(value(t), 1.0 - below);
  }
  EXPECT_NEAR(value(rep.predicted().at("mean_count")), 1.0, 0);
  EXPECT_TRUE(rep.to_json().contains("provenance"));
  for (const auto& [key, entry] : rep.empirical().items()) {
    if (entry.is_object()) {
      EXPECT_TRUE(entry.contains("stderr")) << key;
    }
  }
  for (const auto& [key, entry] : rep.predicted().items()) EXPECT_TRUE(entry.contains("reference")) << key;
}

TEST(CountExperiment, WorkerIndependentAndReproducible) {
  const auto a = run_count_experiment(small(2, 300), {1, {}});
  const auto b = run_count_experiment(small(2, 300), {3, {}});
  EXPECT_EQ(a.to_json().dump(), b.to_json().dump());
  auto other = small(2, 300);
  other.seed = 18;
  EXPECT_NE(run_count_experiment(other).to_json().dump(), a.to_json().dump());
}

TEST(CountExperiment, RequiresOneAnnulus) {
  auto cfg = small(1);
  cfg.annuli.push_back(AnnulusSpec(2, 3));
  EXPECT_THROW(run_count_experiment(cfg), DomainError);
}

TEST(JointExperiment, SingleAnnulusReproducesPmf) {
  auto cfg = small(2, 300);
  const auto counts = run_count_experiment(cfg);
  const auto& pmf = counts.empirical().at("pmf");
  for (unsigned k = 0; k < 3; ++k) {
    auto jc = cfg;
    jc.k_values = {k};
    const auto rep = run_joint_experiment(jc);
    double want = 0;
    for (const auto& e : pmf)
      if (e.at("k").get<unsigned>() == k) want = value(e);
    EXPECT_EQ(value(rep.empirical().at("exact_counts_probability")), want) << k;
  }
}

TEST(JointExperiment, AngleFactor) {
  auto cfg = small(1, 300);
  cfg.annuli = {AnnulusSpec(0, 1), AnnulusSpec(1, 2)};
  cfg.k_values = {1, 1};
  const auto full = run_joint_experiment(cfg);
  EXPECT_NEAR(value(full.predicted().at("exact_counts_probability")), 0.25 * std::exp(-1.0), 1e-15);

  angles::ProductConstraint T(2);
  T.set(1, 0, angles::IntervalSet({{std::numbers::pi / 4, 3 * std::numbers::pi / 4}}));
  cfg.angle_constraint = T;
  const auto part = run_joint_experiment(cfg);
  const double ratio = value(part.predicted().at("exact_counts_probability")) /
                       value(full.predicted().at("exact_counts_probability"));
  EXPECT_NEAR(ratio, angles::a_t_quadrature(T, 6), 1e-12);
  EXPECT_LE(value(part.empirical().at("exact_counts_probability")),
            value(full.empirical().at("exact_counts_probability")));

  angles::ProductConstraint E(2);
  E.set(1, 0, angles::IntervalSet());
  cfg.angle_constraint = E;
  const auto none = run_joint_experiment(cfg);
  EXPECT_EQ(value(none.predicted().at("exact_counts_probability")), 0.0);
  EXPECT_EQ(value(none.empirical().at("exact_counts_probability")), 0.0);

  cfg.angle_constraint.reset();
  cfg.k_values = {3, 3};
  EXPECT_THROW(run_joint_experiment(cfg), DomainError);
}

TEST(MomentExperiment, HOneIsMeanCount) {
  auto cfg = small(2, 300);
  cfg.h = 1;
  const auto m = run_moment_experiment(cfg);
  const auto c = run_count_experiment(cfg);
  EXPECT_NEAR(value(m.empirical().at("independent_tuples_mean")), value(c.empirical().at("mean_count")), 1e-12);
  EXPECT_EQ(value(m.predicted().at("independent_tuples_mean")), 1.0);
}

TEST(IndependenceExperiment, Extremes) {
  auto tiny = small(1e-6, 200);
  EXPECT_EQ(value(run_independence_experiment(tiny).empirical().at("dependent_fraction")), 0.0);
  ExperimentConfig big;
  big.n = 4;
  big.trials = 2000;
  big.seed = 3;
  big.annuli = {AnnulusSpec(0, 8)};
  EXPECT_GT(value(run_independence_experiment(big).empirical().at("dependent_fraction")), 0.0);
}

TEST(MinimaExperiment, FirstMinimumAlwaysMatches) {
  auto cfg = small(1, 200);
  cfg.K = 1;
  const auto rep = run_minima_experiment(cfg);
  EXPECT_EQ(value(rep.empirical().at("fraction_all")), 1.0);
  cfg.K = 3;
  const auto three = run_minima_experiment(cfg);
  EXPECT_TRUE(three.checks().at("per_k_consistency").at("passed").get<bool>());
  EXPECT_EQ(three.find_table("minima")->rows.size(), 4u);
}

TEST(SpacingExperiment, ZeroTestFunction) {
  auto cfg = small(10, 200);
  cfg.test_function = TestFunction{"zero"};
  const auto rep = run_spacing_experiment(cfg);
  EXPECT_EQ(value(rep.empirical().at("bt_statistic_mean")), 0.0);
  EXPECT_EQ(rep.find_table("spacing_histogram")->rows.size(), 24u);
}

TEST(SieveVerification, Passes) {
  SieveSuiteOptions opts;
  opts.max_universe = 8;
  opts.random_families = 50;
  const auto rep = run_sieve_verification(opts);
  for (const auto& [key, c] : rep.checks().items()) EXPECT_TRUE(c.at("passed").get<bool>()) << key;
}

TEST(AnalyticsTable, Grid) {
  const auto rep = run_analytics_table(100, 5, 5);
  const auto* t = rep.find_table("analytics");
  ASSERT_NE(t, nullptr);
  EXPECT_EQ(t->rows.size(), 11u * 5u);
  EXPECT_EQ(t->header.front(), "n");
}
