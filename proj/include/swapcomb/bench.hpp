#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <istream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "swapcomb/domains.hpp"
#include "swapcomb/learners.hpp"
#include "swapcomb/regret.hpp"

namespace swapcomb {

struct DomainSpec {
  std::string kind = "m_sets";  // m_sets, shortcut, dag_file, permutations,
                                // truncated_permutations, spanning_trees, k_forests
  std::size_t d = 0;
  std::size_t m = 0;
  std::size_t n = 0;     // shortcut depth or permutation size
  std::size_t rows = 0;  // truncated permutations
  std::size_t cols = 0;
  std::size_t k = 0;     // forests
  std::size_t vertices = 0;
  std::vector<Edge> edges;
  std::string file;
  bool equalize = true;
};

struct AdversarySpec {
  std::string kind = "iid_stochastic";  // iid_stochastic, piecewise_switching, shortcut, custom_file
  Vector means;
  std::vector<Vector> blocks;
  // 0 means "split the horizon evenly across the blocks".
  std::size_t block_length = 0;
  std::string file;
  std::uint64_t seed = 0;  // iid stream key, mixed with the run seed
};

struct ParamSpec {
  ScheduleMode mode = ScheduleMode::kPractical;
  std::optional<std::size_t> H;
  std::optional<std::size_t> K;
  std::optional<double> gamma;
  double eta_c = 1.0;
  bool eta_c_set = false;
  bool eta_cap = false;
  double spanner_C = 2.0;
};

struct ExperimentConfig {
  std::string name = "run";
  std::string algorithm = "swap_combcp";  // swap_combcp, swap_comband, combexp_replica, exp_weights_baseline
  std::vector<std::size_t> horizons;
  std::vector<std::uint64_t> seeds;
  std::size_t stride = 0;  // 0: max(1, T / 500)
  std::string output = "out";
  bool dump_ledger = false;
  bool doubling = false;
  std::size_t threads = 0;  // 0: hardware concurrency
  DomainSpec domain;
  AdversarySpec adversary;
  ParamSpec params;
};

// Parses the INI/TOML-style text format:
//
//   [run]       name, algorithm, T (one value or a list), seeds (list or a..b),
//               stride, output, dump_ledger, doubling, threads, rng, rng_version
//   [domain]    kind plus its size keys
//   [adversary] kind plus means / blocks / block_length / file / seed
//   [params]    mode, H, K, gamma, eta_c, eta_cap, spanner_C
//
// Relative file paths are resolved against base_dir. Errors are ConfigError
// with the offending line or key.
ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);
// Inverse of parse_config for the keys that are set.
std::string format_config(const ExperimentConfig& cfg);

struct Scenario {
  std::string name;
  std::string summary;
  ExperimentConfig config;
};
const std::vector<Scenario>& scenarios();
const Scenario* find_scenario(const std::string& name);

ActionSet build_domain(const DomainSpec& domain);
std::unique_ptr<RewardSequence> build_adversary(const AdversarySpec& adversary, const ActionSet& set, std::size_t T,
                                                std::uint64_t run_seed);

// Shared per-domain state for one experiment.
struct ExperimentSetup {
  explicit ExperimentSetup(const ExperimentConfig& cfg);
  ExperimentConfig config;
  ActionSet set;
  std::shared_ptr<const LearnerContext> context;  // null for combexp_replica
};

struct ScheduleChoice {
  std::size_t H = 0;
  std::size_t K = 0;
};
ScheduleChoice choose_schedule(const ExperimentConfig& cfg, const ActionSet& set, std::size_t T);

// The algorithm for one (T, seed) run.
std::unique_ptr<BanditAlgorithm> make_algorithm(const ExperimentSetup& setup, std::size_t T, std::uint64_t seed);

struct PrefixPoint {
  std::size_t t = 0;
  double realized = 0.0;
  double external = 0.0;
  double swap = 0.0;
};

struct RunResult {
  std::size_t T = 0;
  std::uint64_t seed = 0;
  double realized = 0.0;
  double expected = 0.0;
  double external = 0.0;
  double swap = 0.0;
  double seconds = 0.0;
  std::vector<PrefixPoint> curve;
  std::optional<Ledger> ledger;  // only with dump_ledger
};

RunResult run_single(const ExperimentSetup& setup, std::size_t T, std::uint64_t seed);

// Every (T, seed) pair, on a worker pool; results ordered by (T, seed).
std::vector<RunResult> run_all(const ExperimentSetup& setup,
                               const std::function<void(const RunResult&)>& progress = {});

struct SummaryRow {
  std::size_t T = 0;
  std::size_t seeds = 0;
  double mean_realized = 0.0;
  double std_realized = 0.0;
  double mean_external = 0.0;
  double std_external = 0.0;
  double mean_swap = 0.0;
  double std_swap = 0.0;
  std::optional<double> swap_ratio;  // mean swap over the previous horizon's
};
std::vector<SummaryRow> summarize(const std::vector<RunResult>& runs);

// Writes <out>/<name>_T<T>_seed<seed>.csv per run, <name>_finals.csv and
// <name>_summary.csv (plus ledgers when requested). Returns written paths.
std::vector<std::filesystem::path> write_outputs(const ExperimentConfig& cfg, const std::vector<RunResult>& runs,
                                                 const std::filesystem::path& out_dir);

// One seed of an instrumented master run with the decomposition audit.
AuditReport audit_single(const ExperimentSetup& setup, std::size_t T, std::uint64_t seed);

}  // namespace swapcomb
