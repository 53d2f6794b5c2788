#include <cmath>
#include <random>

#include "doctest.h"
#include "swapcomb/error.hpp"
#include "swapcomb/linalg.hpp"
#include "swapcomb/master.hpp"
#include "swapcomb/regret.hpp"

using namespace swapcomb;

namespace {

// Never changes its policy; records what it was given.
class FixedLearner : public LazyLearner {
 public:
  FixedLearner(Policy p, std::size_t H, std::size_t k, std::size_t dim, std::size_t planned)
      : LazyLearner(params_for(H, k), dim, planned) {
    set_policy(std::move(p));
  }
  std::vector<Vector> seen;

 protected:
  void meta_update(const Vector& acc) override { seen.push_back(acc); }

 private:
  static ScheduleParams params_for(std::size_t H, std::size_t k) {
    ScheduleParams p;
    p.H = H;
    p.k = k;
    return p;
  }
};

class ThrowingLearner : public LazyLearner {
 public:
  ThrowingLearner(Policy p, std::size_t dim) : LazyLearner(ScheduleParams{}, dim, 1) { set_policy(std::move(p)); }

 protected:
  void meta_update(const Vector&) override {
    throw Error(ErrorCode::kOmdPreconditionViolated, "too big");
  }
};

LearnerFactory fixed_factory(const Policy& p, std::size_t H, std::size_t dim) {
  return [p, H, dim](std::size_t k, std::size_t, std::size_t planned) {
    return std::make_unique<FixedLearner>(p, H, k, dim, planned);
  };
}

LearnerFactory combcp_factory(std::shared_ptr<const LearnerContext> ctx, std::size_t H) {
  return [ctx, H](std::size_t k, std::size_t, std::size_t planned) -> std::unique_ptr<LazyLearner> {
    return std::make_unique<LazyComBCP>(ctx, combcp_practical_schedule(*ctx, H, k, std::nullopt, 1.0), planned);
  };
}

}  // namespace

TEST_CASE("scale counts") {
  CHECK(theory_scale_count(81, 3) == 4);
  CHECK(theory_scale_count(82, 3) == 5);
  CHECK(theory_scale_count(1, 3) == 1);
  CHECK(practical_base(2000) == 45);
  CHECK(practical_base(81) == 9);
  CHECK(practical_base(1) == 2);
  CHECK(practical_scale_count(2000, 45) == 2);
  CHECK(practical_scale_count(81, 3) == 4);
  CHECK(practical_scale_count(5, 3) == 2);
}

TEST_CASE("point-mass master estimate is the rank-one closed form") {
  const auto set = ActionSet::m_sets(3, 2);
  const Action m = Action::from_string("110");
  Master master(set, 2, 1, 5, fixed_factory(Policy::point_mass(m), 2, 3), CounterRng(1));
  CHECK(master.play() == m);
  master.feedback(0.7);
  const Vector& est = master.last_broadcast();
  CHECK(est[0] == doctest::Approx(0.7 / 2.0));
  CHECK(est[1] == doctest::Approx(0.7 / 2.0));
  CHECK(std::abs(est[2]) < 1e-12);
}

TEST_CASE("uniform 2-sets master estimate") {
  const auto set = ActionSet::m_sets(3, 2);
  Master master(set, 2, 2, 50, fixed_factory(Policy::uniform(set.enumerate(10)), 2, 3), CounterRng(4));
  CHECK(master.policy().total_weight() == doctest::Approx(1.0).epsilon(1e-9));
  for (int t = 0; t < 20; ++t) {
    const Action a = master.play();
    master.feedback(1.0);
    // (3I - 3/4 J) M = 3M - 1.5
    for (std::size_t i = 0; i < 3; ++i) CHECK(master.last_broadcast()[i] == doctest::Approx(3.0 * a[i] - 1.5));
  }
  CHECK(master.pseudo_inverse_builds() == 1);

  const Action a = master.play();
  (void)a;
  master.feedback(0.0);
  for (double x : master.last_broadcast()) CHECK(x == 0.0);
}

TEST_CASE("zero rewards never build a pseudo-inverse") {
  const auto set = ActionSet::m_sets(4, 2);
  const auto ctx = make_learner_context(set);
  Master master(set, 3, 2, 30, combcp_factory(ctx, 3), CounterRng(2));
  for (int t = 0; t < 30; ++t) {
    master.play();
    master.feedback(0.0);
  }
  CHECK(master.pseudo_inverse_builds() == 0);
  CHECK_THROWS_AS(master.play(), Error);
}

TEST_CASE("restart calendar and truncated plans") {
  const auto set = ActionSet::m_sets(3, 1);
  std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> built;
  auto inner = fixed_factory(Policy::uniform(set.enumerate(10)), 2, 3);
  LearnerFactory factory = [&](std::size_t k, std::size_t l, std::size_t planned) {
    built.emplace_back(k, l, planned);
    return inner(k, l, planned);
  };
  const std::size_t T = 21;
  Master master(set, 2, 3, T, factory, CounterRng(3));
  for (std::size_t t = 1; t <= T; ++t) {
    master.play();
    master.feedback(0.5);
  }
  for (std::size_t k = 1; k <= 3; ++k) {
    std::vector<std::size_t> days;
    for (const auto& r : master.restarts()) {
      if (r.k == k) days.push_back(r.t);
    }
    std::vector<std::size_t> expect;
    const std::size_t span = std::size_t{1} << k;
    for (std::size_t t = 1; t <= T; t += span) expect.push_back(t);
    CHECK(days == expect);
  }
  // Scale 3 (8-day intervals, 4-day meta-days): l = 3 covers days 17..21.
  bool found = false;
  for (const auto& [k, l, planned] : built) {
    if (k == 3 && l == 3) {
      CHECK(planned == 2);
      found = true;
    }
    if (k == 3 && l < 3) CHECK(planned == 2);
    if (k == 1 && l == 11) CHECK(planned == 1);
  }
  CHECK(found);
}

TEST_CASE("mixture sampling frequencies") {
  const auto set = ActionSet::m_sets(4, 2);
  const auto all = set.enumerate(10);
  const std::vector<Policy> per_scale = {
      Policy({{all[0], 0.7}, {all[3], 0.3}}),
      Policy({{all[1], 0.1}, {all[3], 0.2}, {all[5], 0.7}}),
      Policy::point_mass(all[2]),
  };
  LearnerFactory factory = [&](std::size_t k, std::size_t, std::size_t planned) -> std::unique_ptr<LazyLearner> {
    return std::make_unique<FixedLearner>(per_scale[k - 1], 3, k, 4, planned);
  };
  const int draws = 100000;
  Master master(set, 3, 3, draws, factory, CounterRng(9));
  const Policy base = master.policy();
  CHECK(base.total_weight() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(base.size() == 5);
  CHECK(base.weight_of(all[3]) == doctest::Approx(0.5 / 3.0));
  std::map<Action, double> freq;
  for (int i = 0; i < draws; ++i) {
    freq[master.play()] += 1.0;
    master.feedback(0.0);
  }
  for (const auto& at : base.atoms()) {
    const double se = std::sqrt(at.weight * (1 - at.weight) / draws);
    CHECK(std::abs(freq[at.action] / draws - at.weight) <= 3 * se);
  }
}

TEST_CASE("unbiased estimate under the master mixture") {
  const auto set = ActionSet::m_sets(5, 2);
  const auto ctx = make_learner_context(set);
  Master master(set, 3, 2, 100, combcp_factory(ctx, 3), CounterRng(10));
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0, 0.5);
  for (int t = 0; t < 12; ++t) {
    const Action a = master.play();
    master.feedback(a.dot(Vector{u(gen), u(gen), u(gen), u(gen), u(gen)}));
  }
  const Policy p = master.policy();
  const SymMatrix sigma = co_occurrence(p);
  const SymMatrix plus = pseudo_inverse(sigma);
  const Vector R{0.1, 0.4, 0.2, 0.0, 0.3};
  Vector mean(5, 0.0);
  for (const auto& at : p.atoms()) {
    const Vector est = pseudo_inverse_estimate(p, at.action, at.action.dot(R));
    for (std::size_t i = 0; i < 5; ++i) mean[i] += at.weight * est[i];
  }
  const Vector proj = span_project(sigma, plus, R);
  for (std::size_t i = 0; i < 5; ++i) CHECK(mean[i] == doctest::Approx(proj[i]).epsilon(1e-8));
}

TEST_CASE("errors carry the day and scale") {
  const auto set = ActionSet::m_sets(3, 2);
  const Policy p = Policy::uniform(set.enumerate(10));
  LearnerFactory factory = [&](std::size_t, std::size_t, std::size_t) -> std::unique_ptr<LazyLearner> {
    return std::make_unique<ThrowingLearner>(p, 3);
  };
  Master master(set, 2, 1, 10, factory, CounterRng(1));
  master.play();
  try {
    master.feedback(1.0);
    FAIL("expected a failure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kOmdPreconditionViolated);
    const std::string msg = e.what();
    CHECK(msg.find("t=1") != std::string::npos);
    CHECK(msg.find("k=1") != std::string::npos);
    CHECK(msg.find("l=1") != std::string::npos);
    CHECK(msg.find("h=1") != std::string::npos);
  }
}

TEST_CASE("deterministic replay") {
  const auto set = ActionSet::m_sets(4, 2);
  const auto ctx = make_learner_context(set);
  auto adv = piecewise_switching(set, {{0.5, 0.5, 0.1, 0.1}, {0.1, 0.1, 0.5, 0.5}}, 7);
  Master a(set, 3, 2, 40, combcp_factory(ctx, 3), CounterRng(77));
  Master b(set, 3, 2, 40, combcp_factory(ctx, 3), CounterRng(77));
  const Ledger la = run_horizon(a, *adv, 40);
  const Ledger lb = run_horizon(b, *adv, 40);
  REQUIRE(la.size() == lb.size());
  for (std::size_t t = 0; t < la.size(); ++t) {
    CHECK(la.days()[t].policy == lb.days()[t].policy);
    CHECK(la.action(la.days()[t].sampled) == lb.action(lb.days()[t].sampled));
    CHECK(la.days()[t].realized == lb.days()[t].realized);
  }
  Master empty(set, 3, 2, 0, combcp_factory(ctx, 3), CounterRng(77));
  CHECK(run_horizon(empty, *adv, 0).size() == 0);
}

TEST_CASE("doubling wrapper epochs") {
  const auto set = ActionSet::m_sets(4, 2);
  const auto ctx = make_learner_context(set);
  std::vector<std::size_t> lengths;
  DoublingWrapper wrap([&](std::size_t epoch, std::size_t length) -> std::unique_ptr<BanditAlgorithm> {
    lengths.push_back(length);
    const std::size_t H = practical_base(length);
    return std::make_unique<Master>(set, H, practical_scale_count(length, H), length, combcp_factory(ctx, H),
                                    CounterRng(100 + epoch));
  });
  auto adv = iid_stochastic(set, {0.9, 0.2, 0.6, 0.3}, 4);
  RegretTracker tracker(set);
  Ledger ledger;
  for (std::size_t t = 1; t <= 3; ++t) {
    DayOutcome d = play_day(wrap, *adv, t);
    tracker.add(d.policy, d.reward, d.realized);
    ledger.record(d.policy, d.sampled, d.reward, d.realized);
  }
  CHECK(lengths == std::vector<std::size_t>{1, 2});
  for (std::size_t t = 4; t <= 40; ++t) {
    DayOutcome d = play_day(wrap, *adv, t);
    tracker.add(d.policy, d.reward, d.realized);
    ledger.record(d.policy, d.sampled, d.reward, d.realized);
    if (t == 10 || t == 17 || t == 40) {
      CHECK(tracker.external() == doctest::Approx(external_regret(ledger, set, t)).epsilon(1e-12));
      CHECK(tracker.swap() == doctest::Approx(swap_regret(ledger, set, t)).epsilon(1e-12));
    }
  }
  CHECK(wrap.epoch_ends() == std::vector<std::size_t>{1, 3, 7, 15, 31, 63});
  CHECK(lengths == std::vector<std::size_t>{1, 2, 4, 8, 16, 32});
}
