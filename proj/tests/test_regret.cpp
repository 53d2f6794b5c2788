#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "swapcomb/error.hpp"
#include "swapcomb/regret.hpp"

using namespace swapcomb;

namespace {

Ledger one_day(const Policy& p, const Vector& r) {
  Ledger l;
  l.record(p, p.atoms().front().action, r, p.atoms().front().action.dot(r));
  return l;
}

LearnerFactory combcp_factory(std::shared_ptr<const LearnerContext> ctx, std::size_t H) {
  return [ctx, H](std::size_t k, std::size_t, std::size_t planned) -> std::unique_ptr<LazyLearner> {
    return std::make_unique<LazyComBCP>(ctx, combcp_practical_schedule(*ctx, H, k, std::nullopt, 1.0), planned);
  };
}

}  // namespace

TEST_CASE("external regret examples") {
  const auto set = ActionSet::m_sets(3, 2);
  const auto all = set.enumerate(10);
  const Ledger u = one_day(Policy::uniform(all), {1, 0, 0});
  CHECK(external_regret(u, set) == doctest::Approx(1.0 / 3.0));

  const Ledger best = one_day(Policy::point_mass(Action::from_string("110")), {1, 0, 0});
  CHECK(external_regret(best, set) == 0.0);
  CHECK(swap_regret(best, set) == 0.0);

  const Ledger zero = one_day(Policy::uniform(all), {0, 0, 0});
  CHECK(external_regret(zero, set) == 0.0);
  CHECK(swap_regret(zero, set) == 0.0);
}

TEST_CASE("constant point mass: swap equals external") {
  const auto set = ActionSet::m_sets(4, 2);
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> u(0, 0.5);
  Ledger l;
  const Action a = Action::from_string("0110");
  for (int t = 0; t < 30; ++t) {
    const Vector r{u(gen), u(gen), u(gen), u(gen)};
    l.record(Policy::point_mass(a), a, r, a.dot(r));
  }
  CHECK(swap_regret(l, set) == doctest::Approx(external_regret(l, set)).epsilon(1e-12));
}

TEST_CASE("alternating point masses") {
  // 1-sets of 3: M1 = 100, M2 = 010; each day rewards the other action.
  const auto set = ActionSet::m_sets(3, 1);
  const Action m1 = Action::from_string("100");
  const Action m2 = Action::from_string("010");
  Ledger l;
  for (int t = 0; t < 10; ++t) {
    const bool odd = t % 2 == 1;
    const Action& a = odd ? m2 : m1;
    const Vector r = odd ? Vector{1, 0, 0} : Vector{0, 1, 0};
    l.record(Policy::point_mass(a), a, r, a.dot(r));
  }
  CHECK(external_regret(l, set) == doctest::Approx(5.0));
  CHECK(swap_regret(l, set) == doctest::Approx(10.0));
  CHECK(brute_force_swap_regret(l, set.enumerate(10)) == doctest::Approx(10.0));
}

TEST_CASE("LMO swap form agrees with exhaustive swap functions") {
  std::vector<ActionSet> sets;
  sets.push_back(ActionSet::m_sets(3, 1));
  sets.push_back(ActionSet::m_sets(3, 2));
  sets.push_back(ActionSet::m_sets(4, 2));  // |A| = 6
  sets.push_back(ActionSet::dag_paths(build_shortcut_dag(1)));
  std::mt19937_64 gen(9);
  for (const auto& set : sets) {
    const auto all = set.enumerate(10);
    for (int trial = 0; trial < 40; ++trial) {
      Ledger l;
      const std::size_t support = 1 + gen() % std::min<std::size_t>(4, all.size());
      for (int t = 0; t < 6; ++t) {
        std::vector<Atom> atoms;
        std::vector<std::size_t> ids(all.size());
        for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
        std::shuffle(ids.begin(), ids.end(), gen);
        double total = 0;
        for (std::size_t j = 0; j < support; ++j) {
          const double w = std::uniform_real_distribution<double>(0.1, 1)(gen);
          atoms.push_back({all[ids[j]], w});
          total += w;
        }
        for (auto& a : atoms) a.weight /= total;
        Policy p(atoms);
        p.canonicalize();
        Vector r(set.dim());
        for (double& x : r) x = std::uniform_real_distribution<double>(0, 1.0 / set.weight())(gen);
        l.record(p, p.atoms().front().action, r, 0.0);
      }
      if (l.num_actions() > 4) continue;
      CHECK(swap_regret(l, set) == doctest::Approx(brute_force_swap_regret(l, all)).epsilon(1e-9));
    }
  }
}

TEST_CASE("fixed policies: swap within external and never below it") {
  const auto set = ActionSet::m_sets(4, 2);
  const auto all = set.enumerate(10);
  std::mt19937_64 gen(13);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<Atom> atoms;
    for (const auto& a : all) atoms.push_back({a, std::uniform_real_distribution<double>(0, 1)(gen)});
    double total = 0;
    for (const auto& a : atoms) total += a.weight;
    for (auto& a : atoms) a.weight /= total;
    const Policy p(atoms);
    Ledger l;
    for (int t = 0; t < 20; ++t) {
      Vector r(4);
      for (double& x : r) x = std::uniform_real_distribution<double>(0, 0.5)(gen);
      l.record(p, all[0], r, 0.0);
    }
    CHECK(swap_regret(l, set) <= external_regret(l, set) + 1e-9);
    CHECK(swap_regret(l, set) >= external_regret(l, set) - 1e-9);
  }
}

TEST_CASE("tracker matches ledger prefixes") {
  const auto set = ActionSet::m_sets(4, 2);
  const auto ctx = make_learner_context(set);
  Master master(set, 3, 2, 60, combcp_factory(ctx, 3), CounterRng(3));
  auto adv = iid_stochastic(set, {0.8, 0.1, 0.5, 0.3}, 12);
  RegretTracker tracker(set);
  Ledger ledger;
  for (std::size_t t = 1; t <= 60; ++t) {
    DayOutcome d = play_day(master, *adv, t);
    tracker.add(d.policy, d.reward, d.realized);
    ledger.record(d.policy, d.sampled, d.reward, d.realized);
    CHECK(tracker.external() == doctest::Approx(external_regret(ledger, set, t)).epsilon(1e-12));
    CHECK(tracker.swap() == doctest::Approx(swap_regret(ledger, set, t)).epsilon(1e-12));
    CHECK(tracker.cumulative_realized() == doctest::Approx(realized_reward(ledger, t)));
    CHECK(tracker.swap() >= tracker.external() - 1e-9);
  }
}

TEST_CASE("adversaries") {
  const auto set = ActionSet::m_sets(4, 2);
  auto iid = iid_stochastic(set, {0.9, 0.5, 0.5, 0.1}, 5);
  auto again = iid_stochastic(set, {0.9, 0.5, 0.5, 0.1}, 5);
  for (std::size_t t = 1; t <= 50; ++t) {
    const Vector r = iid->at(t);
    CHECK(r == again->at(t));
    CHECK(set.lmo(r).dot(r) <= 1.0 + 1e-12);
    for (double x : r) CHECK((x == 0.0 || x == 0.5));
  }
  CHECK(iid->at(7) == iid->at(7));

  auto one = piecewise_switching(set, {{0.2, 0.3, 0.1, 0.0}}, 5);
  for (std::size_t t = 1; t <= 20; ++t) CHECK(one->at(t) == Vector{0.2, 0.3, 0.1, 0.0});

  auto big = piecewise_switching(set, {{1, 1, 0, 0}, {0, 0, 0.5, 0.5}}, 3);
  CHECK(big->scale() == doctest::Approx(0.5));
  CHECK(big->at(1) == Vector{0.5, 0.5, 0, 0});
  CHECK(big->at(4) == Vector{0, 0, 0.25, 0.25});
  CHECK(big->at(7) == Vector{0.5, 0.5, 0, 0});

  CHECK_THROWS_AS(piecewise_switching(set, {{1, 2, 0, 0}}, 3), Error);
  CHECK_THROWS_AS(piecewise_switching(set, {{1, 0}}, 3), Error);
}

TEST_CASE("shortcut adversary") {
  for (std::size_t n : {3u, 8u}) {
    const auto set = ActionSet::dag_paths(build_shortcut_dag(n));
    auto adv = shortcut_adversary(set, n);
    const std::size_t shortcut = set.leveled()->coordinate_of[0];
    Vector total(set.dim(), 0.0);
    const std::size_t T = 50;
    for (std::size_t t = 1; t <= T; ++t) {
      const Vector r = adv->at(t);
      CHECK(r[shortcut] == 1.0);
      for (std::size_t i = 0; i < r.size(); ++i) total[i] += r[i];
    }
    const Action best = set.lmo(total);
    CHECK(best.dot(total) == doctest::Approx(static_cast<double>(T)));
    CHECK(set.leveled()->project(best).ones() == std::vector<std::size_t>{0});
  }
  const auto raw = ActionSet::dag_paths(build_shortcut_dag(3), false);
  CHECK(shortcut_adversary(raw, 3)->at(1)[0] == 1.0);
  const auto wrong = ActionSet::dag_paths(build_shortcut_dag(4));
  CHECK_THROWS_AS(shortcut_adversary(wrong, 3), Error);
  CHECK_THROWS_AS(shortcut_adversary(ActionSet::m_sets(4, 2), 3), Error);
}

TEST_CASE("custom reward files") {
  const auto set = ActionSet::m_sets(3, 2);
  std::istringstream ok("# day rewards\n0.2,0.4,0.1\n\n1,1,0\n");
  auto adv = custom_file(set, ok);
  CHECK(adv->scale() == doctest::Approx(0.5));
  CHECK(adv->at(1)[1] == doctest::Approx(0.2));
  CHECK(adv->at(2) == Vector{0.5, 0.5, 0.0});
  CHECK(adv->at(3)[0] == doctest::Approx(0.1));

  std::istringstream bad_cols("0.1,0.2\n");
  std::istringstream bad_value("0.1,x,0.2\n");
  std::istringstream bad_range("0.1,1.5,0.2\n");
  std::istringstream empty("\n# nothing\n");
  for (auto* in : {&bad_cols, &bad_value, &bad_range, &empty}) {
    try {
      custom_file(set, *in);
      FAIL("expected a config error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kConfig);
    }
  }
}

TEST_CASE("decomposition audit") {
  const auto set = ActionSet::m_sets(3, 2);
  const auto ctx = make_learner_context(set);

  // K = 1: no interval terms, the bound is T.
  {
    Master master(set, 3, 1, 20, combcp_factory(ctx, 3), CounterRng(1));
    auto adv = piecewise_switching(set, {{0.5, 0.1, 0.2}}, 1);
    DecompositionRecorder rec(1);
    Ledger ledger;
    for (std::size_t t = 1; t <= 20; ++t) {
      DayOutcome d = play_day(master, *adv, t, [&] { rec.observe(master, adv->at(t)); });
      ledger.record(d.policy, d.sampled, d.reward, d.realized);
    }
    const AuditReport r = decomposition_audit(ledger, set, rec);
    CHECK(r.rhs == doctest::Approx(20.0));
    CHECK(r.holds);
  }

  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const std::size_t T = 81;
    Master master(set, 3, 3, T, combcp_factory(ctx, 3), CounterRng(seed));
    auto adv = piecewise_switching(set, {{0.5, 0.5, 0.1}, {0.1, 0.5, 0.5}, {0.5, 0.1, 0.5}}, 9);
    DecompositionRecorder rec(3);
    Ledger ledger;
    for (std::size_t t = 1; t <= T; ++t) {
      DayOutcome d = play_day(master, *adv, t, [&] { rec.observe(master, adv->at(t)); });
      ledger.record(d.policy, d.sampled, d.reward, d.realized);
    }
    const AuditReport r = decomposition_audit(ledger, set, rec);
    // 27 + 9 + 3 intervals across the three scales.
    CHECK(r.intervals.size() == 39);
    std::size_t covered = 0;
    for (const auto& iv : r.intervals) {
      if (iv.k == 1) covered += iv.last_day - iv.first_day + 1;
    }
    CHECK(covered == T);
    CHECK(r.holds);
    CHECK(r.slack >= -1e-6);
  }
}
