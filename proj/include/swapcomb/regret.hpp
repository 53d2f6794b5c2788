#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <istream>
#include <limits>
#include <map>
#include <span>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "swapcomb/action.hpp"
#include "swapcomb/domains.hpp"
#include "swapcomb/learners.hpp"
#include "swapcomb/master.hpp"
#include "swapcomb/rng.hpp"

namespace swapcomb {

// An oblivious reward sequence. at(t) is a pure function of t (1-based), so
// replays and random access agree.
class RewardSequence {
 public:
  virtual ~RewardSequence() = default;
  virtual std::string kind() const = 0;
  virtual std::size_t dim() const = 0;
  virtual Vector at(std::size_t t) const = 0;
  // Global factor applied at construction to keep realized rewards in [0,1].
  double scale() const { return scale_; }

 protected:
  double scale_ = 1.0;
};

// R_t(i) ~ Bernoulli(means[i]) / m, independently per day and coordinate.
std::unique_ptr<RewardSequence> iid_stochastic(const ActionSet& set, Vector means, std::uint64_t seed);

// Day t uses blocks[((t - 1) / block_length) mod blocks.size()], rescaled
// once so that the best action earns at most 1 under every block.
std::unique_ptr<RewardSequence> piecewise_switching(const ActionSet& set, std::vector<Vector> blocks,
                                                    std::size_t block_length);

// Reward 1 on the shortcut edge every day. The set must be the path set of
// build_shortcut_dag(n) (leveled or not).
std::unique_ptr<RewardSequence> shortcut_adversary(const ActionSet& set, std::size_t n);

// One CSV row per day, d columns; days past the last row repeat from the
// start. Rescaled globally if any best realized reward exceeds 1.
std::unique_ptr<RewardSequence> custom_file(const ActionSet& set, std::istream& in);

// Per-day trajectory. Actions are interned; policies are stored exactly.
class Ledger {
 public:
  struct Day {
    std::vector<std::pair<std::size_t, double>> policy;  // (action id, weight)
    std::size_t sampled = 0;
    Vector reward;
    double realized = 0.0;
  };

  std::size_t intern(const Action& a);
  const Action& action(std::size_t id) const { return actions_.at(id); }
  std::size_t num_actions() const { return actions_.size(); }

  void record(const Policy& p, const Action& sampled, Vector reward, double realized);
  const std::vector<Day>& days() const { return days_; }
  std::size_t size() const { return days_.size(); }

 private:
  std::vector<Action> actions_;
  std::map<Action, std::size_t> ids_;
  std::vector<Day> days_;
};

// Regret over the first `prefix` days (all days by default), using the
// exact stored policies rather than the sampled actions.
double external_regret(const Ledger& ledger, const ActionSet& set, std::size_t prefix = SIZE_MAX);
double swap_regret(const Ledger& ledger, const ActionSet& set, std::size_t prefix = SIZE_MAX);
double realized_reward(const Ledger& ledger, std::size_t prefix = SIZE_MAX);

// Maximum over every map phi from the support actions into `actions` of the
// swap gain; exponential, for cross-checking only.
double brute_force_swap_regret(const Ledger& ledger, const std::vector<Action>& actions);

// Streaming counterpart of the evaluators above.
class RegretTracker {
 public:
  explicit RegretTracker(const ActionSet& set);

  void add(const Policy& p, std::span<const double> reward, double realized);
  std::size_t days() const { return days_; }
  double external() const;
  double swap() const;
  double cumulative_realized() const { return realized_; }
  double cumulative_expected() const { return expected_; }

 private:
  const ActionSet& set_;
  std::size_t days_ = 0;
  Vector total_;
  double expected_ = 0.0;
  double realized_ = 0.0;
  std::map<Action, Vector> gain_;
};

struct DayOutcome {
  Policy policy;
  Action sampled;
  Vector reward;
  double realized = 0.0;
};

// Plays one day: snapshot the policy, sample, reveal only R_t . M_t to the
// algorithm. `before_feedback` runs after sampling and before the update.
DayOutcome play_day(BanditAlgorithm& alg, const RewardSequence& adversary, std::size_t t,
                    const std::function<void()>& before_feedback = {});

Ledger run_horizon(BanditAlgorithm& alg, const RewardSequence& adversary, std::size_t T);

// Instrumentation for the swap decomposition: for each scale interval, the
// summed true rewards and the learner's own expected reward on them.
struct IntervalAudit {
  std::size_t k = 0;
  std::size_t l = 0;
  std::size_t first_day = 0;
  std::size_t last_day = 0;
  Vector reward_sum;
  double learner_reward = 0.0;
  double regret = 0.0;  // filled by decomposition_audit
};

class DecompositionRecorder {
 public:
  explicit DecompositionRecorder(std::size_t K) : K_(K) {}
  // Call once per day after sampling and before the master's update.
  void observe(const Master& master, std::span<const double> reward);
  const std::vector<IntervalAudit>& intervals() const { return intervals_; }
  std::size_t K() const { return K_; }

 private:
  std::size_t K_;
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> index_;
  std::vector<IntervalAudit> intervals_;
};

struct AuditReport {
  std::size_t T = 0;
  std::size_t K = 0;
  double swap = 0.0;
  double external = 0.0;
  double interval_regret_sum = 0.0;      // scales 1..K-1
  double interval_regret_sum_all = 0.0;  // scales 1..K
  double rhs = 0.0;                      // interval_regret_sum / K + T / K
  double slack = 0.0;                    // rhs - swap
  bool holds = false;                    // swap <= rhs + 1e-6
  std::vector<IntervalAudit> intervals;
};

AuditReport decomposition_audit(const Ledger& ledger, const ActionSet& set, const DecompositionRecorder& rec);

}  // namespace swapcomb
