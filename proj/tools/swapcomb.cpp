#include <cstdio>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "swapcomb/bench.hpp"
#include "swapcomb/error.hpp"

namespace fs = std::filesystem;
using namespace swapcomb;

namespace {

// A config argument names a file, or a preset when no such file exists.
ExperimentConfig resolve(const std::string& arg) {
  if (fs::exists(arg)) return load_config(arg);
  if (const Scenario* s = find_scenario(arg)) return s->config;
  throw Error(ErrorCode::kConfig, "no config file or scenario named '" + arg + "'");
}

int cmd_run(const std::string& arg, std::uint64_t seed_offset, const std::string& out, bool quiet) {
  ExperimentConfig cfg = resolve(arg);
  for (auto& s : cfg.seeds) s += seed_offset;
  const fs::path dir = out.empty() ? fs::path(cfg.output) : fs::path(out);
  ExperimentSetup setup(cfg);
  std::cerr << "domain: " << setup.set.describe() << "\n";
  for (std::size_t T : cfg.horizons) {
    if (cfg.algorithm.rfind("swap_", 0) == 0 && !cfg.doubling) {
      const auto sc = choose_schedule(cfg, setup.set, T);
      std::cerr << "T=" << T << ": H=" << sc.H << " K=" << sc.K << " (" << to_string(cfg.params.mode) << ")\n";
    }
  }
  const auto runs = run_all(setup, [&](const RunResult& r) {
    if (!quiet) {
      std::fprintf(stderr, "T=%zu seed=%llu realized=%.4f external=%.4f swap=%.4f (%.2fs)\n", r.T,
                   static_cast<unsigned long long>(r.seed), r.realized, r.external, r.swap, r.seconds);
    }
  });
  for (const auto& p : write_outputs(cfg, runs, dir)) {
    if (!quiet) std::cerr << "wrote " << p.string() << "\n";
  }
  std::printf("T,seeds,mean_realized,mean_external,mean_swap,swap_ratio\n");
  for (const auto& row : summarize(runs)) {
    std::printf("%zu,%zu,%.6g,%.6g,%.6g,%s\n", row.T, row.seeds, row.mean_realized, row.mean_external,
                row.mean_swap, row.swap_ratio ? std::to_string(*row.swap_ratio).c_str() : "");
  }
  return 0;
}

int cmd_scenarios(const std::string& dump) {
  if (!dump.empty()) {
    const Scenario* s = find_scenario(dump);
    if (!s) throw Error(ErrorCode::kConfig, "unknown scenario '" + dump + "'");
    std::cout << format_config(s->config);
    return 0;
  }
  for (const auto& s : scenarios()) std::printf("%-22s %s\n", s.name.c_str(), s.summary.c_str());
  return 0;
}

int cmd_audit(const std::string& arg) {
  const ExperimentConfig cfg = resolve(arg);
  ExperimentSetup setup(cfg);
  bool ok = true;
  std::printf("T,seed,K,swap_regret,external_regret,interval_regret_sum,rhs,slack,holds\n");
  for (std::size_t T : cfg.horizons) {
    for (std::uint64_t seed : cfg.seeds) {
      const AuditReport r = audit_single(setup, T, seed);
      ok = ok && r.holds;
      std::printf("%zu,%llu,%zu,%.9g,%.9g,%.9g,%.9g,%.9g,%s\n", T, static_cast<unsigned long long>(seed), r.K,
                  r.swap, r.external, r.interval_regret_sum, r.rhs, r.slack, r.holds ? "yes" : "no");
    }
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Swap-regret learning for combinatorial bandits"};
  app.require_subcommand(1);

  std::string config;
  std::uint64_t seed_offset = 0;
  std::string out;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "Run an experiment and write CSV metrics");
  run->add_option("config", config, "Config file or scenario name")->required();
  run->add_option("--seed-offset", seed_offset, "Added to every configured seed");
  run->add_option("--out", out, "Output directory (default: the config's output)");
  run->add_flag("-q,--quiet", quiet, "Only print the summary");

  std::string dump;
  auto* list = app.add_subcommand("scenarios", "List preset scenarios");
  list->add_option("--dump", dump, "Print the config of one preset");

  std::string audit_config;
  auto* audit = app.add_subcommand("audit", "Check the swap-regret decomposition on an instrumented run");
  audit->add_option("config", audit_config, "Config file or scenario name")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(config, seed_offset, out, quiet);
    if (*list) return cmd_scenarios(dump);
    if (*audit) return cmd_audit(audit_config);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
