#include "latstat/cli.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>

#include <CLI11.hpp>

#include "latstat/error.hpp"
#include "latstat/parallel.hpp"

#ifndef LATSTAT_VERSION
#define LATSTAT_VERSION "unknown"
#endif

namespace latstat::cli {
namespace {

using experiments::ExperimentConfig;
using report::Json;

const std::vector<std::string> kSubcommands = {"counts", "moments", "independence", "minima",
                                               "joint",  "spacing", "sieve-verify", "analytics-table"};

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

lattice::AnnulusSpec parse_volume(const std::string& text) {
  const auto colon = text.find(':');
  try {
    std::size_t used = 0;
    if (colon == std::string::npos) {
      const double v = std::stod(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
      return lattice::AnnulusSpec(0.0, v);
    }
    const std::string a = text.substr(0, colon), b = text.substr(colon + 1);
    const double s = std::stod(a, &used);
    if (used != a.size()) throw std::invalid_argument(text);
    const double t = std::stod(b, &used);
    if (used != b.size()) throw std::invalid_argument(text);
    return lattice::AnnulusSpec(s, t);
  } catch (const DomainError& e) {
    throw ConfigError("--volume " + text + ": " + e.what());
  } catch (const std::exception&) {
    throw ConfigError("--volume " + text + ": expected V or s:t");
  }
}

std::vector<lattice::AnnulusSpec> default_annuli(const std::string& sub) {
  if (sub == "counts") return {{0.0, 1.0}};
  if (sub == "moments") return {{0.0, 2.0}};
  if (sub == "independence") return {{0.0, 0.3}};
  if (sub == "joint") return {{0.0, 1.0}, {1.0, 2.0}};
  if (sub == "spacing") return {{0.0, 30.0}};
  return {};
}

struct Flags {
  std::string config_path;
  std::optional<std::uint64_t> seed, trials, prime;
  std::optional<unsigned> n, h, K;
  std::vector<std::string> volumes;
  std::vector<unsigned> k_values;
  std::optional<std::string> base_lattice;
  std::optional<std::string> test_function;
  std::optional<std::size_t> max_set_size;
  unsigned workers = default_workers();
  std::string out = "latstat-out";
  bool check_config = false;
  unsigned max_universe = 12;
  std::uint64_t families = 1000;
  unsigned v_n = 100;
  double v_max = 5.0;
  unsigned k_max = 5;
};

void add_experiment_flags(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config_path, "JSON experiment config");
  app->add_option("--seed", f.seed, "64-bit seed");
  app->add_option("--trials", f.trials, "number of random lattices");
  app->add_option("--n", f.n, "dimension");
  app->add_option("--volume", f.volumes, "annulus as s:t, or V for (0, V); repeatable");
  app->add_option("--prime", f.prime, "Construction-A modulus");
  app->add_option("--base-lattice", f.base_lattice, "sheared (default) or integer");
  app->add_option("--workers", f.workers, "worker threads");
  app->add_option("--out", f.out, "output directory");
  app->add_flag("--check-config", f.check_config, "validate, print the normalized config and exit");
}

ExperimentConfig build_config(const std::string& sub, const Flags& f) {
  ExperimentConfig cfg;
  if (!f.config_path.empty()) {
    auto res = validate_config(f.config_path);
    if (!res.config) {
      std::string msg = f.config_path + ":";
      for (const auto& e : res.errors) msg += "\n  " + e;
      throw ConfigError(msg);
    }
    cfg = *res.config;
  } else {
    cfg.annuli = default_annuli(sub);
    if (sub == "joint") cfg.k_values = {1, 1};
  }
  if (f.seed) cfg.seed = *f.seed;
  if (f.trials) cfg.trials = *f.trials;
  if (f.prime) cfg.prime = *f.prime;
  if (f.n) cfg.n = *f.n;
  if (f.h) cfg.h = *f.h;
  if (f.K) cfg.K = *f.K;
  if (f.max_set_size) cfg.max_set_size = *f.max_set_size;
  if (!f.volumes.empty()) {
    cfg.annuli.clear();
    for (const auto& v : f.volumes) cfg.annuli.push_back(parse_volume(v));
  }
  if (!f.k_values.empty()) cfg.k_values = f.k_values;
  if (f.base_lattice) {
    if (*f.base_lattice == "integer") {
      cfg.base = sampler::BaseLattice::kInteger;
    } else if (*f.base_lattice == "sheared") {
      cfg.base = sampler::BaseLattice::kSheared;
    } else {
      throw ConfigError("--base-lattice: expected sheared or integer");
    }
  }
  if (f.test_function) {
    experiments::TestFunction tf = cfg.test_function.value_or(experiments::TestFunction{});
    tf.name = *f.test_function;
    cfg.test_function = tf;
  }
  const auto errors = experiments::config_errors(cfg);
  if (!errors.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw ConfigError(msg);
  }
  return cfg;
}

class Progress {
 public:
  explicit Progress(std::string label) : label_(std::move(label)) {}
  void operator()(std::size_t done, std::size_t total) {
    std::lock_guard<std::mutex> lock(mu_);
    const std::size_t tenth = total >= 10 ? total / 10 : 1;
    if (done % tenth != 0 && done != total) return;
    std::cerr << "[" << label_ << "] " << done << "/" << total << " trials\n";
  }

 private:
  std::string label_;
  std::mutex mu_;
};

std::string summary_line(const report::ExperimentReport& rep, const std::filesystem::path& out) {
  std::ostringstream s;
  s << rep.experiment() << ":";
  const Json& e = rep.empirical();
  const Json& d = rep.distances();
  auto field = [&](const char* label, const Json& j) {
    if (j.is_object() && j.contains("value")) {
      s << " " << label << "=" << report::format_number(j["value"].get<double>());
    }
  };
  if (e.contains("mean_count")) field("mean", e["mean_count"]);
  if (d.contains("total_variation_poisson")) s << " tv=" << report::format_number(d["total_variation_poisson"].get<double>());
  if (e.contains("independent_tuples_mean")) field("independent_mean", e["independent_tuples_mean"]);
  if (e.contains("dependent_fraction")) field("dependent_fraction", e["dependent_fraction"]);
  if (e.contains("fraction_all")) field("fraction_all", e["fraction_all"]);
  if (e.contains("exact_counts_probability")) field("exact_probability", e["exact_counts_probability"]);
  if (e.contains("spacing_mean")) field("spacing_mean", e["spacing_mean"]);
  if (d.contains("ks_exponential")) s << " ks=" << report::format_number(d["ks_exponential"].get<double>());
  bool all_pass = true;
  for (const auto& [_, c] : rep.checks().items()) all_pass = all_pass && c["passed"].get<bool>();
  if (!rep.checks().empty()) s << " checks=" << (all_pass ? "pass" : "fail");
  s << " -> " << (out / "report.json").string();
  return s.str();
}

int run(const std::string& sub, const Flags& f, const std::vector<std::string>& argv) {
  const std::string started = utc_now();
  std::optional<report::ExperimentReport> rep;
  Json manifest_seed = nullptr;
  if (sub == "sieve-verify") {
    experiments::SieveSuiteOptions o;
    o.max_universe = f.max_universe;
    o.random_families = f.families;
    o.seed = f.seed.value_or(0);
    manifest_seed = o.seed;
    rep = experiments::run_sieve_verification(o);
  } else if (sub == "analytics-table") {
    rep = experiments::run_analytics_table(f.v_n, f.v_max, f.k_max);
  } else {
    const ExperimentConfig cfg = build_config(sub, f);
    if (f.check_config) {
      std::cout << experiments::config_to_json(cfg).dump(2) << "\n";
      return kExitOk;
    }
    manifest_seed = cfg.seed;
    Progress progress(sub);
    experiments::RunOptions opts;
    opts.workers = f.workers;
    opts.progress = [&progress](std::size_t d, std::size_t t) { progress(d, t); };
    if (sub == "counts") rep = experiments::run_count_experiment(cfg, opts);
    if (sub == "moments") rep = experiments::run_moment_experiment(cfg, opts);
    if (sub == "independence") rep = experiments::run_independence_experiment(cfg, opts);
    if (sub == "minima") rep = experiments::run_minima_experiment(cfg, opts);
    if (sub == "joint") rep = experiments::run_joint_experiment(cfg, opts);
    if (sub == "spacing") rep = experiments::run_spacing_experiment(cfg, opts);
  }
  const std::filesystem::path out(f.out);
  rep->write(out);
  Json manifest;
  manifest["subcommand"] = sub;
  manifest["config_path"] = f.config_path.empty() ? Json(nullptr) : Json(f.config_path);
  manifest["seed"] = manifest_seed;
  manifest["output_directory"] = out.string();
  manifest["workers"] = f.workers;
  manifest["argv"] = argv;
  manifest["started_at"] = started;
  manifest["finished_at"] = utc_now();
  manifest["code_version"] = LATSTAT_VERSION;
  std::ofstream mf(out / "manifest.json", std::ios::binary);
  mf << manifest.dump(2) << "\n";
  if (!mf) throw ResourceError("cannot write " + (out / "manifest.json").string());
  std::cout << summary_line(*rep, out) << std::endl;
  return kExitOk;
}

}  // namespace

ConfigResult validate_config(const std::filesystem::path& path) {
  ConfigResult res;
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    res.errors.push_back("cannot read " + path.string());
    return res;
  }
  std::stringstream buf;
  buf << in.rdbuf();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::parse_error& e) {
    res.errors.push_back("parse error at byte " + std::to_string(e.byte) + ": " + e.what());
    return res;
  }
  res.config = experiments::config_from_json(j, res.errors);
  return res;
}

int dispatch(const std::vector<std::string>& argv) {
  CLI::App app{"Random-lattice statistics: sieve checks, Poisson analytics and Monte-Carlo experiments"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "print this help and exit");
  Flags f;
  for (const auto& name : kSubcommands) {
    CLI::App* sub = app.add_subcommand(name);
    sub->set_help_flag("--help", "print this help and exit");
    if (name == "sieve-verify") {
      sub->add_option("--max-universe", f.max_universe, "largest universe for the binomial checks");
      sub->add_option("--families", f.families, "random corank families");
      sub->add_option("--seed", f.seed, "64-bit seed");
      sub->add_option("--out", f.out, "output directory");
    } else if (name == "analytics-table") {
      sub->add_option("--n", f.v_n, "dimension");
      sub->add_option("--v-max", f.v_max, "largest volume (grid step 0.5)");
      sub->add_option("--k-max", f.k_max, "largest k");
      sub->add_option("--out", f.out, "output directory");
    } else {
      add_experiment_flags(sub, f);
      if (name == "moments") {
        sub->add_option("--h", f.h, "tuple size");
        sub->add_option("--max-set-size", f.max_set_size, "skip trials with more vectors than this");
      }
      if (name == "minima") sub->add_option("--K", f.K, "number of minima compared");
      if (name == "joint") sub->add_option("--k", f.k_values, "target count per annulus; repeatable");
      if (name == "spacing") sub->add_option("--test-function", f.test_function, "bump (default) or zero");
    }
  }

  std::vector<std::string> args(argv.begin() + (argv.empty() ? 0 : 1), argv.end());
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return kExitConfig;
  }
  const std::string sub = app.get_subcommands().front()->get_name();
  try {
    return run(sub, f, argv);
  } catch (const ResourceError& e) {
    std::cerr << "resource error: " << e.what() << "\n";
    return kExitResource;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const InvariantError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

int dispatch(int argc, char** argv) { return dispatch(std::vector<std::string>(argv, argv + argc)); }

}  // namespace latstat::cli
