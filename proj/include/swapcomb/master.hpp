#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "swapcomb/action.hpp"
#include "swapcomb/domains.hpp"
#include "swapcomb/learners.hpp"
#include "swapcomb/linalg.hpp"
#include "swapcomb/rng.hpp"

namespace swapcomb {

// Builds the instance learner for interval l (1-based) of scale k, given the
// number of meta-days it will actually play.
using LearnerFactory =
    std::function<std::unique_ptr<LazyLearner>(std::size_t k, std::size_t l, std::size_t planned_meta_days)>;

struct RestartEvent {
  std::size_t t = 0;  // first day of the new interval
  std::size_t k = 0;
  std::size_t l = 0;
};

// Scale counts.
//   theory:    K = max(1, ceil(log_H T)), so that T <= H^K
//   practical: H = ceil(sqrt(T)) unless given, K = max(2, floor(log_H T))
std::size_t theory_scale_count(std::size_t T, std::size_t H);
std::size_t practical_base(std::size_t T);
std::size_t practical_scale_count(std::size_t T, std::size_t H);

// The multi-scale master: K scale slots, uniform mixture, one-sample
// pseudo-inverse estimate broadcast to every scale each day.
class Master : public BanditAlgorithm {
 public:
  Master(const ActionSet& set, std::size_t H, std::size_t K, std::size_t T, LearnerFactory factory,
         CounterRng rng);

  std::string name() const override { return "swap_master"; }
  const Policy& policy() override;
  Action play() override;
  void feedback(double reward) override;

  std::size_t H() const { return H_; }
  std::size_t K() const { return K_; }
  std::size_t horizon() const { return T_; }
  // 1-based index of the day about to be played (or being played).
  std::size_t day() const { return t_; }
  // 1-based scale and interval views.
  const LazyLearner& scale(std::size_t k) const { return *slots_.at(k - 1).learner; }
  std::size_t interval(std::size_t k) const { return slots_.at(k - 1).l; }
  std::size_t sampled_scale() const { return sampled_scale_; }
  const Vector& last_broadcast() const { return broadcast_; }
  const std::vector<RestartEvent>& restarts() const { return restarts_; }
  // How many times the pseudo-inverse of the mixture was recomputed.
  std::size_t pseudo_inverse_builds() const { return pinv_builds_; }

 private:
  struct Slot {
    std::unique_ptr<LazyLearner> learner;
    std::size_t l = 0;
    std::uint64_t generation = 0;
  };

  void start_day();
  void refresh_mixture();

  const ActionSet& set_;
  std::size_t H_;
  std::size_t K_;
  std::size_t T_;
  LearnerFactory factory_;
  CounterRng rng_;
  std::vector<Slot> slots_;
  std::uint64_t next_generation_ = 1;
  std::size_t t_ = 1;

  Policy mixture_;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> mixture_key_;
  std::optional<SymMatrix> sigma_plus_;
  Policy pinv_mixture_;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> pinv_key_;
  std::size_t pinv_builds_ = 0;

  std::optional<Action> last_;
  std::size_t sampled_scale_ = 0;
  Vector broadcast_;
  std::vector<RestartEvent> restarts_;
};

// Anytime wrapper: epoch i (0-based) runs a fresh algorithm built for a
// horizon of 2^i days. Epochs start at days 1, 2, 4, 8, ... and end at
// cumulative days 1, 3, 7, 15, ...
class DoublingWrapper : public BanditAlgorithm {
 public:
  using Factory = std::function<std::unique_ptr<BanditAlgorithm>(std::size_t epoch, std::size_t length)>;

  explicit DoublingWrapper(Factory factory);

  std::string name() const override { return "doubling"; }
  const Policy& policy() override;
  Action play() override;
  void feedback(double reward) override;

  std::size_t epoch() const { return epoch_; }
  std::size_t day() const { return t_; }
  // Cumulative day on which each started epoch ends (the last possibly in
  // the future).
  const std::vector<std::size_t>& epoch_ends() const { return ends_; }

 private:
  void ensure_epoch();

  Factory factory_;
  std::unique_ptr<BanditAlgorithm> current_;
  std::size_t epoch_ = 0;
  std::size_t used_in_epoch_ = 0;
  std::size_t t_ = 1;
  std::vector<std::size_t> ends_;
};

}  // namespace swapcomb
