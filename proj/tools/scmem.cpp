#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "scmem/harness.hpp"

namespace {

scmem::SimConfig random_config(int n, int ops, int faults, std::uint64_t seed,
                               scmem::VirtualTime dmin, scmem::VirtualTime dmax) {
  scmem::CampaignParams params;
  params.n_values = {n};
  params.min_ops = params.max_ops = ops;
  params.crash_percent = faults > 0 ? 100 : 0;
  params.seed_base = seed;
  params.delay_min = dmin;
  params.delay_max = dmax;
  scmem::SimConfig cfg = scmem::make_random_config(params, 0);
  if (static_cast<int>(cfg.crashes.size()) > faults) cfg.crashes.resize(faults);
  cfg.max_crashes = faults;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sequentially consistent snapshot memory: simulator, checkers, baseline"};
  app.require_subcommand(1);

  // run ----------------------------------------------------------------
  auto* run = app.add_subcommand("run", "execute one simulated run and check it");
  std::string run_config, run_scenario, run_check = "both", run_out, run_protocol = "snapshot";
  int run_n = 3, run_ops = 6, run_faults = 0;
  std::uint64_t run_seed = 1;
  scmem::VirtualTime run_dmin = 1, run_dmax = 10;
  run->add_option("--config", run_config, "config document (key = value lines)");
  run->add_option("--scenario", run_scenario,
                  "built-in scenario: two-writers, alternating-writers, back-to-back, "
                  "quiescent-snapshot");
  run->add_option("--n", run_n, "number of processes");
  run->add_option("--ops", run_ops, "number of random operations");
  run->add_option("--faults", run_faults, "number of crashes to inject");
  run->add_option("--seed", run_seed, "seed for schedule and delays");
  run->add_option("--delay-min", run_dmin, "minimum message delay");
  run->add_option("--delay-max", run_dmax, "maximum message delay");
  run->add_option("--check", run_check, "brute | witness | both | none");
  run->add_option("--out", run_out, "prefix for .trace and .history files");
  run->add_option("--protocol", run_protocol, "snapshot | abd");

  // campaign -------------------------------------------------------------
  auto* campaign = app.add_subcommand("campaign", "randomized runs with aggregate metrics");
  scmem::CampaignSpec cspec;
  std::string campaign_n = "3,5,7";
  campaign->add_option("--runs", cspec.runs, "number of runs");
  campaign->add_option("--n", campaign_n, "comma-separated process counts");
  campaign->add_option("--seed", cspec.params.seed_base, "base seed; run i uses seed base+i");
  campaign->add_option("--ops", cspec.params.max_ops, "max operations per run");
  campaign->add_option("--crash-percent", cspec.params.crash_percent,
                       "probability (0-100) that each allowed fault slot is used");
  campaign->add_option("--delay-min", cspec.params.delay_min, "minimum message delay");
  campaign->add_option("--delay-max", cspec.params.delay_max, "maximum message delay");
  campaign->add_option("--rounds", cspec.rounds, "run round-structured executions instead");
  campaign->add_option("--check", cspec.check, "brute | witness | both | none");
  campaign->add_option("--out", cspec.out_path, "machine-readable summary file");

  // check -----------------------------------------------------------------
  auto* check = app.add_subcommand("check", "check a recorded history");
  scmem::CheckSpec kspec;
  check->add_option("--history", kspec.history_path, "history file to check");
  check->add_option("--builtin", kspec.builtin,
                    "built-in history: crossed, crossed-x, crossed-y, round-violation");
  check->add_option("--trace", kspec.trace_path, "trace file (for witness mode)");
  check->add_option("--spec", kspec.spec_name, "snapshot | registers | auto");
  check->add_option("--mode", kspec.mode, "brute | witness");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      scmem::RunSpec spec;
      spec.protocol = run_protocol;
      spec.check = run_check;
      spec.out_prefix = run_out;
      spec.scenario = run_scenario;
      if (!run_config.empty())
        spec.config = scmem::parse_config_text(scmem::read_file(run_config), &spec.protocol);
      else if (run_scenario.empty())
        spec.config = random_config(run_n, run_ops, run_faults, run_seed, run_dmin, run_dmax);
      if (run->count("--seed") && run_config.empty()) spec.config.seed = run_seed;
      return scmem::cmd_run(spec, std::cout);
    }
    if (campaign->parsed()) {
      cspec.params.n_values.clear();
      std::istringstream ns(campaign_n);
      std::string item;
      while (std::getline(ns, item, ',')) cspec.params.n_values.push_back(std::stoi(item));
      if (cspec.params.n_values.empty()) throw scmem::ConfigError("--n needs at least one value");
      return scmem::cmd_campaign(cspec, std::cout);
    }
    if (check->parsed()) {
      if (kspec.history_path.empty() && kspec.builtin.empty())
        throw scmem::ConfigError("check needs --history or --builtin");
      return scmem::cmd_check(kspec, std::cout);
    }
  } catch (const scmem::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return scmem::kExitUsage;
  } catch (const scmem::InvariantViolation& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return scmem::kExitViolation;
  } catch (const scmem::ProtocolError& e) {
    std::cerr << "protocol error: " << e.what() << "\n";
    return scmem::kExitViolation;
  }
  return scmem::kExitUsage;
}
