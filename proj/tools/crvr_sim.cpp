// Command-line front end: trace generation, single runs, sweeps and the
// equilibrium/property verification suites.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "crvr/engine.hpp"
#include "crvr/errors.hpp"
#include "crvr/verification.hpp"

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string axis;
  std::string values;
  std::string arms;
  std::vector<std::string> sets;
};

crvr::ExperimentConfig build_config(const Flags& f) {
  auto cfg = crvr::default_experiment();
  if (!f.config.empty()) crvr::apply_config_file(cfg, f.config);
  for (const auto& kv : f.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw crvr::ConfigError("--set expects key=value, got '" + kv + "'");
    crvr::set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (f.seed) {
    cfg.seed = *f.seed;
    cfg.trace.rng_seed = *f.seed;
  }
  if (!f.out.empty()) cfg.output_dir = f.out;
  if (!f.axis.empty()) cfg.axis = crvr::parse_axis(f.axis);
  if (!f.values.empty()) cfg.values = crvr::parse_value_list(f.values);
  if (!f.arms.empty()) cfg.arms = crvr::parse_arm_list(f.arms);
  return cfg;
}

double current_axis_value(const crvr::ExperimentConfig& cfg) {
  switch (cfg.axis) {
    case crvr::SweepAxis::kGamma: return cfg.params.gamma;
    case crvr::SweepAxis::kBeta: return cfg.params.beta;
    case crvr::SweepAxis::kBetaE: return cfg.params.beta_e;
    case crvr::SweepAxis::kRedundantBudget: return cfg.values.empty() ? 1.0 : cfg.values.front();
  }
  return 0.0;
}

int run_and_export(crvr::ExperimentConfig cfg) {
  const auto output = crvr::sweep(cfg);
  crvr::export_results(output, cfg.output_dir, cfg.pdr_denominator);
  crvr::write_summary_csv(std::cout, output.rows);
  return 0;
}

int verify(const Flags& f) {
  const std::uint64_t seed = f.seed.value_or(11);
  bool ok = true;
  auto line = [&](const std::string& name, bool pass, const std::string& detail) {
    ok = ok && pass;
    std::cout << (pass ? "PASS " : "FAIL ") << name << ": " << detail << '\n';
  };

  const auto eq = crvr::run_equilibrium_suite(50, seed);
  line("equilibrium", eq.passed == eq.instances,
       std::to_string(eq.passed) + "/" + std::to_string(eq.instances) + " instances, " +
           std::to_string(eq.unsolved) + " without a consistent pair, max leader gap " +
           std::to_string(eq.max_leader_gap));
  const auto fa = crvr::run_follower_argmax_suite(10000, seed);
  line("follower-argmax", fa.mismatches == 0, std::to_string(fa.mismatches) + " mismatches in " +
                                                  std::to_string(fa.samples));
  const auto sf = crvr::check_standard_function(1000, seed);
  line("standard-function", sf.passed(),
       std::to_string(sf.positivity_violations) + "/" + std::to_string(sf.monotonicity_violations) + "/" +
           std::to_string(sf.scalability_violations) + " positivity/monotonicity/scalability violations; " +
           std::to_string(sf.raw_scalability_violations) + " on unclamped Omega");
  const auto un = crvr::run_uniqueness_suite(50, seed);
  line("fixed-point-uniqueness", un.mismatches == 0,
       std::to_string(un.mismatches) + " of " + std::to_string(un.samples) + " start pairs differ");
  const auto ld = crvr::run_leader_suite(1000, seed);
  line("leader-closed-form", ld.max_error <= 1e-3 && ld.max_jump <= 1e-6,
       "max error " + std::to_string(ld.max_error) + ", max jump " + std::to_string(ld.max_jump));

  if (!f.out.empty()) {
    std::filesystem::create_directories(f.out);
    for (auto s : eq.failing_seeds) {
      const auto path = std::filesystem::path(f.out) / ("equilibrium_seed_" + std::to_string(s) + ".csv");
      std::ofstream out(path);
      if (!out) throw crvr::IoError("cannot write " + path.string());
      crvr::write_report_csv(out, crvr::verify_equilibrium_bruteforce(crvr::random_instance(s)));
    }
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Privacy-aware redundant requesting and edge caching simulator"};
  app.require_subcommand(1);
  Flags f;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", f.config, "key = value configuration file");
    sub->add_option("--seed", f.seed, "seed for the trace and randomized arms");
    sub->add_option("--out", f.out, "output directory");
    sub->add_option("--set", f.sets, "override one config key (key=value), repeatable");
  };

  auto* gen = app.add_subcommand("gen-trace", "generate a synthetic catalog and trace");
  add_common(gen);
  auto* run = app.add_subcommand("run", "run the configured arms once");
  add_common(run);
  run->add_option("--arms", f.arms, "comma-separated arms, e.g. crvr-evc,nr-evc,random-evc,crvr-lru");
  auto* sw = app.add_subcommand("sweep", "sweep one parameter across arms");
  add_common(sw);
  sw->add_option("--axis", f.axis, "gamma, beta, beta_e or budget");
  sw->add_option("--values", f.values, "comma-separated axis values");
  sw->add_option("--arms", f.arms, "comma-separated arms");
  auto* ver = app.add_subcommand("verify", "equilibrium and response-function property suites");
  ver->add_option("--seed", f.seed, "suite seed");
  ver->add_option("--out", f.out, "directory for failing-instance reports");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      auto cfg = build_config(f);
      const auto data = crvr::experiment_trace(cfg);
      crvr::export_trace(cfg.output_dir, data.catalog, data.trace);
      std::cout << "wrote " << data.catalog.size() << " videos and " << data.trace.total_requests()
                << " requests to " << cfg.output_dir.string() << '\n';
      return 0;
    }
    if (run->parsed()) {
      auto cfg = build_config(f);
      cfg.values = {current_axis_value(cfg)};
      return run_and_export(cfg);
    }
    if (sw->parsed()) return run_and_export(build_config(f));
    if (ver->parsed()) return verify(f);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
