#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "swapcomb/action.hpp"
#include "swapcomb/domains.hpp"
#include "swapcomb/rng.hpp"
#include "swapcomb/spanner.hpp"

namespace swapcomb {

enum class ScheduleMode { kTheory, kPractical };
const char* to_string(ScheduleMode mode);

// H^e with saturation at SIZE_MAX.
std::size_t saturating_pow(std::size_t base, std::size_t exponent);

struct ScheduleParams {
  std::size_t H = 2;
  std::size_t k = 1;
  double gamma = 0.5;
  double eta = 0.0;
  ScheduleMode mode = ScheduleMode::kPractical;

  // Days per meta-day, H^{k-1}.
  std::size_t meta_day_length() const { return saturating_pow(H, k - 1); }
};

// Number of meta-days played by interval l (1-based) of scale k when the run
// stops after T days: H for complete intervals, the truncated count for the
// last one.
std::size_t truncated_meta_days(std::size_t T, std::size_t H, std::size_t k, std::size_t l);

// Immutable per-domain data shared by every learner instance and restart.
struct LearnerContext {
  const ActionSet* set = nullptr;
  Spanner spanner;
  Policy exploration;          // mu, uniform over the spanner
  double lambda_mu = 0.0;      // min nonzero eigenvalue of E_mu[M M^T]
  Vector initial_q;            // uniform q, projected onto P when outside it
  Policy initial_decomposition;
  std::vector<Action> actions;  // enumerated A; filled only when requested
};

std::shared_ptr<const LearnerContext> make_learner_context(const ActionSet& set, double spanner_C = 2.0,
                                                           bool enumerate_actions = false,
                                                           std::size_t enumeration_cap = 100000);

ScheduleParams combcp_theory_schedule(const LearnerContext& ctx, std::size_t H, std::size_t k);
ScheduleParams comband_theory_schedule(const LearnerContext& ctx, std::size_t H, std::size_t k);

// Practical schedules: gamma defaults to H^{-1/3}; eta = eta_c times the
// default rate. The OMD precondition is then only checked at run time; with
// cap = true eta is also clipped so that it holds for every possible
// meta-day aggregate.
//   ComBCP default rate: 1 / (d sqrt(m) H^{k-1/3}), cap gamma lambda_mu / (H^{k-1} sqrt(m))
//   ComBand default rate: lambda_mu / (H^{k-1/3} m), cap gamma lambda_mu / (H^{k-1} m)
ScheduleParams combcp_practical_schedule(const LearnerContext& ctx, std::size_t H, std::size_t k,
                                         std::optional<double> gamma, double eta_c, bool cap = false);
ScheduleParams comband_practical_schedule(const LearnerContext& ctx, std::size_t H, std::size_t k,
                                          std::optional<double> gamma, double eta_c, bool cap = false);

// A lazy instance learner: its policy is frozen for H^{k-1} consecutive
// days, during which the broadcast estimates are summed.
class LazyLearner {
 public:
  virtual ~LazyLearner() = default;

  const Policy& policy() const { return policy_; }
  // Bumped whenever the frozen policy changes.
  std::uint64_t policy_version() const { return version_; }
  const ScheduleParams& params() const { return params_; }

  std::size_t meta_day() const { return h_; }
  std::size_t day_in_meta_day() const { return tau_; }
  std::size_t meta_days_planned() const { return planned_; }
  std::size_t updates() const { return updates_; }
  const Vector& accumulated() const { return acc_; }

  // Adds one day's estimate; at the end of a meta-day the update fires and
  // the accumulator is reset.
  void ingest(std::span<const double> estimate);

 protected:
  LazyLearner(ScheduleParams params, std::size_t dim, std::size_t planned_meta_days);
  void set_policy(Policy p);
  virtual void meta_update(const Vector& acc) = 0;

 private:
  ScheduleParams params_;
  Policy policy_;
  Vector acc_;
  std::size_t h_ = 1;
  std::size_t tau_ = 0;
  std::size_t planned_;
  std::size_t updates_ = 0;
  std::uint64_t version_ = 0;
};

class LazyComBCP : public LazyLearner {
 public:
  LazyComBCP(std::shared_ptr<const LearnerContext> ctx, ScheduleParams params,
             std::size_t planned_meta_days);
  const Vector& q() const { return q_; }

 protected:
  void meta_update(const Vector& acc) override;

 private:
  void rebuild_policy(const Policy& decomposition);

  std::shared_ptr<const LearnerContext> ctx_;
  Vector q_;
};

class LazyComBand : public LazyLearner {
 public:
  LazyComBand(std::shared_ptr<const LearnerContext> ctx, ScheduleParams params,
              std::size_t planned_meta_days);
  // Normalized exponential weights p~ over ctx->actions.
  Vector weights() const;

 protected:
  void meta_update(const Vector& acc) override;

 private:
  void rebuild_policy();

  std::shared_ptr<const LearnerContext> ctx_;
  Vector log_w_;
};

// Learner side of the bandit protocol. Only the scalar reward of the played
// action is ever passed in.
class BanditAlgorithm {
 public:
  virtual ~BanditAlgorithm() = default;
  virtual std::string name() const = 0;
  // The distribution today's action is drawn from.
  virtual const Policy& policy() = 0;
  virtual Action play() = 0;
  virtual void feedback(double reward) = 0;
};

// Non-lazy exponential weights over an enumerated action set with spanner
// exploration and the pseudo-inverse estimator built from its own policy.
class Exp2Baseline : public BanditAlgorithm {
 public:
  Exp2Baseline(std::shared_ptr<const LearnerContext> ctx, double gamma, double eta, CounterRng rng);
  std::string name() const override { return "exp_weights_baseline"; }
  const Policy& policy() override { return policy_; }
  Action play() override;
  void feedback(double reward) override;
  Vector weights() const;

 private:
  void rebuild_policy();

  std::shared_ptr<const LearnerContext> ctx_;
  double gamma_;
  double eta_;
  CounterRng rng_;
  Vector log_w_;
  Policy policy_;
  std::optional<Action> last_;
};

// Single-learner algorithm that mixes with the uniform-action marginal,
// decomposes, samples, and updates coordinate weights with a KL projection.
class CombExpReplica : public BanditAlgorithm {
 public:
  CombExpReplica(const ActionSet& set, std::size_t T, CounterRng rng);
  std::string name() const override { return "combexp_replica"; }
  const Policy& policy() override { return policy_; }
  Action play() override;
  void feedback(double reward) override;

  const Vector& q() const { return q_; }
  const Vector& mu0() const { return mu0_; }
  double gamma() const { return gamma_; }
  double eta() const { return eta_; }
  double mu_min() const { return mu_min_; }
  std::size_t updates() const { return updates_; }

 private:
  void rebuild_policy();

  const ActionSet& set_;
  CounterRng rng_;
  Vector mu0_;
  Vector q_;
  double mu_min_ = 0.0;
  double gamma_ = 0.0;
  double eta_ = 0.0;
  Policy policy_;
  std::optional<Action> last_;
  std::size_t updates_ = 0;
};

// Estimate r Sigma^+ M for the given policy.
Vector pseudo_inverse_estimate(const Policy& p, const Action& played, double reward);

}  // namespace swapcomb
