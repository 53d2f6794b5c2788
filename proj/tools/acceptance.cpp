// Acceptance runner: one PASS/FAIL line per criterion.
//
//   swapcomb_acceptance            run everything
//   swapcomb_acceptance --list     print criterion names
//   swapcomb_acceptance --only X   run one criterion
//
// Exit status is 0 iff every selected criterion passed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "swapcomb/bench.hpp"
#include "swapcomb/error.hpp"
#include "swapcomb/geometry.hpp"
#include "swapcomb/learners.hpp"
#include "swapcomb/linalg.hpp"
#include "swapcomb/master.hpp"
#include "swapcomb/regret.hpp"
#include "swapcomb/spanner.hpp"

using namespace swapcomb;

namespace {

// Tolerances and limits. Runtime limits of 0 mean "none stated".
constexpr double kUnbiasedTol = 1e-8;
constexpr double kVarianceTol = 1e-8;
constexpr double kSwapOracleTol = 1e-9;
constexpr double kFixedPolicyTol = 1e-9;
constexpr double kAuditTol = 1e-6;
constexpr double kResidualTol = 1e-7;
constexpr double kFixedPointTol = 1e-10;
constexpr double kGridTol = 1e-6;
constexpr double kGridStep = 1e-3;
constexpr double kAnytimeTol = 1e-9;
constexpr std::size_t kCounterexampleMinSeeds = 45;
constexpr double kFixedRewardFraction = 0.3;
constexpr double kTrendMaxRatio = 1.9;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  std::string name;
  double limit_seconds;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::vector<Vector> gram_schmidt(const std::vector<Action>& actions, std::size_t dim) {
  std::vector<Vector> basis;
  for (const auto& a : actions) {
    Vector v(dim);
    for (std::size_t i = 0; i < dim; ++i) v[i] = a[i];
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& b : basis) {
        const double c = dot(v, b);
        for (std::size_t i = 0; i < dim; ++i) v[i] -= c * b[i];
      }
    }
    const double n = norm2(v);
    if (n > 1e-9) {
      for (double& x : v) x /= n;
      basis.push_back(std::move(v));
    }
  }
  return basis;
}

Vector project_onto(const std::vector<Vector>& basis, const Vector& x) {
  Vector out(x.size(), 0.0);
  for (const auto& b : basis) {
    const double c = dot(x, b);
    for (std::size_t i = 0; i < x.size(); ++i) out[i] += c * b[i];
  }
  return out;
}

Policy random_policy(const std::vector<Action>& all, std::size_t max_support, std::mt19937_64& gen) {
  std::vector<std::size_t> idx(all.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::shuffle(idx.begin(), idx.end(), gen);
  std::uniform_int_distribution<std::size_t> size(1, std::min(max_support, all.size()));
  std::exponential_distribution<double> w(1.0);
  const std::size_t s = size(gen);
  std::vector<Atom> atoms;
  double tot = 0.0;
  for (std::size_t j = 0; j < s; ++j) {
    atoms.push_back({all[idx[j]], w(gen) + 1e-3});
    tot += atoms.back().weight;
  }
  for (auto& a : atoms) a.weight /= tot;
  Policy p(std::move(atoms));
  p.canonicalize();
  return p;
}

Vector random_reward(std::size_t d, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vector r(d);
  for (double& x : r) x = u(gen);
  return r;
}

Outcome unbiasedness() {
  std::mt19937_64 gen(101);
  const std::vector<ActionSet> sets{ActionSet::m_sets(3, 2), ActionSet::m_sets(4, 2), ActionSet::m_sets(5, 1)};
  double worst = 0.0;
  std::size_t count = 0;
  for (const auto& set : sets) {
    const auto all = set.enumerate(1000);
    for (int trial = 0; trial < 50; ++trial, ++count) {
      const Policy p = random_policy(all, all.size(), gen);
      const Vector R = random_reward(set.dim(), gen);
      Vector mean(set.dim(), 0.0);
      for (const auto& at : p.atoms()) {
        const Vector est = pseudo_inverse_estimate(p, at.action, at.action.dot(R));
        for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += at.weight * est[i];
      }
      std::vector<Action> support;
      for (const auto& at : p.atoms()) support.push_back(at.action);
      const Vector proj = project_onto(gram_schmidt(support, set.dim()), R);
      for (std::size_t i = 0; i < mean.size(); ++i) worst = std::max(worst, std::abs(mean[i] - proj[i]));
    }
  }
  return {worst <= kUnbiasedTol, fmt("%zu policies, max |E[est] - proj R| = %.3g (tol %.0e)", count, worst,
                                     kUnbiasedTol)};
}

Outcome spanner_bound() {
  std::vector<ActionSet> sets;
  for (std::size_t d = 1; d <= 8; ++d) {
    for (std::size_t m = 1; m <= d; ++m) sets.push_back(ActionSet::m_sets(d, m));
  }
  for (std::size_t n = 1; n <= 4; ++n) sets.push_back(ActionSet::dag_paths(build_shortcut_dag(n)));
  for (std::size_t n = 1; n <= 4; ++n) sets.push_back(ActionSet::permutations(n));
  double worst_margin = std::numeric_limits<double>::infinity();
  std::string worst_set;
  std::size_t proper = 0;  // span(A) is a proper subspace: full-space minimum is 0
  double min_full = std::numeric_limits<double>::infinity();
  bool ok = true;
  for (const auto& set : sets) {
    const auto sp = build_spanner(set, 2.0);
    const auto eig = eigen_sym(co_occurrence(exploration_policy(sp)));
    const double lambda = min_nonzero_eigenvalue(eig);
    const double full = std::max(0.0, eig.values.back());
    if (sp.rank < set.dim()) ++proper;
    else min_full = std::min(min_full, full);
    const double d = static_cast<double>(set.dim());
    const double bound = 1.0 / (4.0 * d * d * d);
    if (lambda < bound) ok = false;
    if (lambda / bound < worst_margin) {
      worst_margin = lambda / bound;
      worst_set = set.describe();
    }
  }
  return {ok, fmt("%zu instances, smallest nonzero-spectrum lambda/bound = %.3g on %s; "
                  "%zu instances have full-space lambda_min = 0, the rest >= %.3g",
                  sets.size(), worst_margin, worst_set.c_str(), proper, min_full)};
}

UndirectedGraph complete_graph(std::size_t n) {
  UndirectedGraph g{n, {}};
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) g.edges.emplace_back(u, v);
  }
  return g;
}

Outcome variance_bound() {
  std::mt19937_64 gen(103);
  const std::vector<ActionSet> sets{ActionSet::m_sets(4, 2),
                                    ActionSet::m_sets(5, 2),
                                    ActionSet::m_sets(6, 3),
                                    ActionSet::permutations(3),
                                    ActionSet::dag_paths(build_shortcut_dag(2)),
                                    ActionSet::spanning_trees(complete_graph(4)),
                                    ActionSet::truncated_permutations(2, 3)};
  std::size_t count = 0;
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; count < 100; s = (s + 1) % sets.size()) {
    const auto& set = sets[s];
    const auto all = set.enumerate(10000);
    const std::size_t rank = gram_schmidt(all, set.dim()).size();
    Policy p;
    std::vector<Action> support;
    do {
      p = random_policy(all, all.size(), gen);
      support.clear();
      for (const auto& at : p.atoms()) support.push_back(at.action);
    } while (gram_schmidt(support, set.dim()).size() < rank);
    const SymMatrix sigma = co_occurrence(p);
    const SymMatrix plus = pseudo_inverse(sigma);
    double lhs = 0.0;
    for (const auto& at : p.atoms()) {
      Vector m(set.dim());
      for (std::size_t i = 0; i < m.size(); ++i) m[i] = at.action[i];
      const Vector x = plus.multiply(m);
      lhs += at.weight * dot(x, x);
    }
    const double rhs = static_cast<double>(set.dim()) / min_nonzero_eigenvalue(sigma);
    worst = std::max(worst, lhs - rhs);
    ++count;
  }
  return {worst <= kVarianceTol, fmt("%zu span-complete policies, max E[|S+M|^2] - d/lambda = %.3g", count, worst)};
}

Outcome swap_oracle() {
  std::mt19937_64 gen(107);
  std::vector<ActionSet> sets;
  for (std::size_t d = 1; d <= 6; ++d) {
    for (std::size_t m = 1; m <= d; ++m) {
      const auto s = ActionSet::m_sets(d, m);
      if (*s.count() <= 6) sets.push_back(s);
    }
  }
  for (std::size_t n = 1; n <= 2; ++n) sets.push_back(ActionSet::dag_paths(build_shortcut_dag(n)));
  sets.push_back(ActionSet::permutations(3));
  sets.push_back(ActionSet::truncated_permutations(1, 4));
  sets.push_back(ActionSet::truncated_permutations(2, 3));
  sets.push_back(ActionSet::spanning_trees(complete_graph(3)));
  double worst = 0.0;
  std::size_t ledgers = 0;
  for (const auto& set : sets) {
    const auto all = set.enumerate(6);
    for (int trial = 0; trial < 20; ++trial, ++ledgers) {
      Ledger ledger;
      for (int t = 0; t < 6; ++t) {
        const Policy p = random_policy(all, 4, gen);
        const Vector r = random_reward(set.dim(), gen);
        const Action& a = p.atoms().front().action;
        ledger.record(p, a, r, a.dot(r));
      }
      worst = std::max(worst, std::abs(swap_regret(ledger, set) - brute_force_swap_regret(ledger, all)));
    }
  }
  return {worst <= kSwapOracleTol, fmt("%zu instances, %zu ledgers, max |lmo - exhaustive| = %.3g", sets.size(),
                                       ledgers, worst)};
}

Outcome fixed_policy() {
  std::mt19937_64 gen(109);
  const std::vector<ActionSet> sets{ActionSet::m_sets(4, 2), ActionSet::m_sets(5, 3), ActionSet::permutations(3),
                                    ActionSet::dag_paths(build_shortcut_dag(3))};
  double above = -std::numeric_limits<double>::infinity();
  double below = -std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 100; ++trial) {
    const auto& set = sets[trial % sets.size()];
    const auto all = set.enumerate(1000);
    const Policy fixed = random_policy(all, set.dim() + 1, gen);
    Ledger still;
    Ledger moving;
    for (int t = 0; t < 25; ++t) {
      const Vector r = random_reward(set.dim(), gen);
      const Action& a = fixed.atoms().front().action;
      still.record(fixed, a, r, a.dot(r));
      const Policy p = random_policy(all, set.dim() + 1, gen);
      moving.record(p, p.atoms().front().action, r, p.atoms().front().action.dot(r));
    }
    const double s = swap_regret(still, set);
    const double e = external_regret(still, set);
    above = std::max(above, s - e);
    below = std::max(below, e - s);
    below = std::max(below, external_regret(moving, set) - swap_regret(moving, set));
  }
  const bool ok = above <= kFixedPolicyTol && below <= kFixedPolicyTol;
  return {ok, fmt("100 fixed-policy ledgers: max swap - ext = %.3g; max ext - swap (all ledgers) = %.3g", above,
                  below)};
}

Outcome audit() {
  const auto* sc = find_scenario("audit");
  ExperimentSetup setup(sc->config);
  std::size_t held = 0;
  double min_slack = std::numeric_limits<double>::infinity();
  for (auto seed : sc->config.seeds) {
    const auto rep = audit_single(setup, sc->config.horizons.front(), seed);
    if (rep.swap <= rep.rhs + kAuditTol) ++held;
    min_slack = std::min(min_slack, rep.slack);
  }
  return {held == sc->config.seeds.size(),
          fmt("%zu/%zu seeds satisfy swap <= sum/K + T/K, min slack %.4g", held, sc->config.seeds.size(), min_slack)};
}

double reconstruction_error(const Policy& p, const Vector& target) {
  const Vector rec = p.marginal();
  double e = 0.0;
  for (std::size_t i = 0; i < rec.size(); ++i) e = std::max(e, std::abs(rec[i] - target[i]));
  return e;
}

Outcome geometry() {
  std::mt19937_64 gen(113);
  const std::vector<ActionSet> sets{ActionSet::m_sets(6, 2),
                                    ActionSet::dag_paths(build_shortcut_dag(3)),
                                    ActionSet::spanning_trees(complete_graph(4)),
                                    ActionSet::k_forests(complete_graph(5), 2),
                                    ActionSet::permutations(4),
                                    ActionSet::truncated_permutations(3, 4)};
  double worst_res = 0.0;
  double worst_fix = 0.0;
  bool support_ok = true;
  for (const auto& set : sets) {
    const auto all = set.enumerate(100000);
    const double m = static_cast<double>(set.weight());
    const Vector center = set.uniform_marginal();
    std::uniform_int_distribution<std::size_t> pick(0, all.size() - 1);
    std::exponential_distribution<double> ex(1.0);
    for (int i = 0; i < 200; ++i) {
      Vector x(set.dim(), 0.0);
      const std::size_t k = 1 + pick(gen) % std::min<std::size_t>(all.size(), 2 * set.dim());
      std::vector<std::pair<std::size_t, double>> parts;
      double tot = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        parts.emplace_back(pick(gen), ex(gen));
        tot += parts.back().second;
      }
      for (const auto& [a, w] : parts) {
        for (std::size_t c : all[a].ones()) x[c] += w / tot;
      }
      Vector q(set.dim());
      for (std::size_t c = 0; c < q.size(); ++c) q[c] = x[c] / m;
      const Policy p = decompose(set, q);
      worst_res = std::max(worst_res, reconstruction_error(p, x));
      if (p.size() > set.dim() + 1) support_ok = false;
      if (i % 10 == 0) {
        // Interior point (pulled toward the center) is a projection fixed point.
        Vector z(set.dim());
        for (std::size_t c = 0; c < z.size(); ++c) z[c] = 0.5 * q[c] + 0.5 * center[c] / m;
        const Vector proj = kl_project(set, z);
        for (std::size_t c = 0; c < z.size(); ++c) worst_fix = std::max(worst_fix, std::abs(proj[c] - z[c]));
      }
    }
  }

  double worst_grid = -std::numeric_limits<double>::infinity();
  std::uniform_real_distribution<double> u(0.05, 1.0);
  for (const auto& [d, m] : std::vector<std::pair<int, int>>{{3, 1}, {3, 2}, {4, 2}}) {
    Vector raw(d);
    for (double& v : raw) v = u(gen);
    const auto q = kl_project(ActionSet::m_sets(d, m), raw);
    const double cap = 1.0 / m;
    const int steps = static_cast<int>(std::round(cap / kGridStep));
    double grid_min = std::numeric_limits<double>::infinity();
    Vector z(d);
    std::function<void(int, double)> walk = [&](int i, double used) {
      if (i == d - 1) {
        z[i] = 1.0 - used;
        if (z[i] >= -1e-12 && z[i] <= cap + 1e-12) grid_min = std::min(grid_min, generalized_kl(z, raw));
        return;
      }
      for (int a = 0; a <= steps; ++a) {
        z[i] = a * kGridStep;
        if (used + z[i] > 1.0 + 1e-12) break;
        walk(i + 1, used + z[i]);
      }
    };
    walk(0, 0.0);
    worst_grid = std::max(worst_grid, generalized_kl(q, raw) - grid_min);
  }
  const bool ok = worst_res <= kResidualTol && support_ok && worst_fix <= kFixedPointTol && worst_grid <= kGridTol;
  return {ok, fmt("6 kinds x 200 points: max residual %.3g, support %s; fixed point %.3g; KL - grid min %.3g",
                  worst_res, support_ok ? "<= d+1" : "EXCEEDS d+1", worst_fix, worst_grid)};
}

Outcome counterexample() {
  const auto* broken = find_scenario("counterexample");
  const auto* fixed = find_scenario("counterexample-fixed");
  const std::size_t T = broken->config.horizons.front();
  ExperimentSetup a(broken->config);
  std::size_t zero = 0;
  double mean_a = 0.0;
  for (auto seed : broken->config.seeds) {
    const auto r = run_single(a, T, seed);
    if (r.realized == 0.0) ++zero;
    mean_a += r.realized / static_cast<double>(broken->config.seeds.size());
  }
  ExperimentSetup b(fixed->config);
  std::size_t good = 0;
  double min_b = std::numeric_limits<double>::infinity();
  for (auto seed : fixed->config.seeds) {
    const auto r = run_single(b, T, seed);
    if (r.realized >= kFixedRewardFraction * static_cast<double>(T)) ++good;
    min_b = std::min(min_b, r.realized);
  }
  const bool ok = zero >= kCounterexampleMinSeeds && good >= kCounterexampleMinSeeds;
  return {ok, fmt("combexp_replica: %zu/%zu seeds with zero reward (need %zu, mean reward %.2f); "
                  "swap_combcp: %zu/%zu seeds >= %.1f*T (need %zu, min %.1f)",
                  zero, broken->config.seeds.size(), kCounterexampleMinSeeds, mean_a, good,
                  fixed->config.seeds.size(), kFixedRewardFraction, kCounterexampleMinSeeds, min_b)};
}

Outcome trend() {
  const auto* sc = find_scenario("trend");
  ExperimentSetup setup(sc->config);
  const auto rows = summarize(run_all(setup));
  bool ok = rows.size() >= 2;
  std::string ratios;
  for (const auto& row : rows) {
    if (!row.swap_ratio) continue;
    ratios += fmt("%s%zu:%.3f", ratios.empty() ? "" : " ", row.T, *row.swap_ratio);
    if (*row.swap_ratio > kTrendMaxRatio) ok = false;
  }
  return {ok, fmt("swap(2T)/swap(T) = [%s] (max %.2f)", ratios.c_str(), kTrendMaxRatio)};
}

Outcome doubling() {
  const auto* sc = find_scenario("anytime");
  ExperimentSetup setup(sc->config);
  const std::size_t T = sc->config.horizons.front();
  const std::vector<std::size_t> stops{1, 2, 3, 4, 7, 8, 50, 127, 128, 129, 300, 511, 700, T};
  double worst = 0.0;
  bool ends_ok = true;
  for (auto seed : sc->config.seeds) {
    auto alg = make_algorithm(setup, T, seed);
    auto* wrap = dynamic_cast<DoublingWrapper*>(alg.get());
    if (!wrap) return {false, "anytime scenario did not build a doubling wrapper"};
    auto adv = build_adversary(sc->config.adversary, setup.set, T, seed);
    RegretTracker tracker(setup.set);
    Ledger ledger;
    std::size_t next = 0;
    for (std::size_t t = 1; t <= T; ++t) {
      DayOutcome d = play_day(*alg, *adv, t);
      tracker.add(d.policy, d.reward, d.realized);
      ledger.record(d.policy, d.sampled, d.reward, d.realized);
      if (next < stops.size() && stops[next] == t) {
        worst = std::max(worst, std::abs(tracker.external() - external_regret(ledger, setup.set, t)));
        worst = std::max(worst, std::abs(tracker.swap() - swap_regret(ledger, setup.set, t)));
        worst = std::max(worst, std::abs(tracker.cumulative_realized() - realized_reward(ledger, t)));
        ++next;
      }
    }
    const auto& ends = wrap->epoch_ends();
    for (std::size_t i = 0; i < ends.size(); ++i) {
      if (ends[i] != (std::size_t{2} << i) - 1) ends_ok = false;
    }
  }
  return {worst <= kAnytimeTol && ends_ok,
          fmt("%zu seeds x %zu stops: max |tracker - ledger| = %.3g; epochs start at 2^i: %s",
              sc->config.seeds.size(), stops.size(), worst, ends_ok ? "yes" : "no")};
}

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> list{
      {"estimator_unbiasedness", 1.0, unbiasedness},
      {"spanner_eigenvalue_bound", 5.0, spanner_bound},
      {"estimator_variance_bound", 5.0, variance_bound},
      {"swap_oracle_equivalence", 10.0, swap_oracle},
      {"fixed_policy_swap_vs_external", 0.0, fixed_policy},
      {"decomposition_audit", 30.0, audit},
      {"geometry_round_trips", 60.0, geometry},
      {"shortcut_counterexample", 600.0, counterexample},
      {"sublinearity_trend", 900.0, trend},
      {"doubling_consistency", 0.0, doubling},
  };
  return list;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"swapcomb acceptance criteria"};
  std::string only;
  bool list = false;
  app.add_option("--only", only, "run a single criterion");
  app.add_flag("--list", list, "list criterion names");
  CLI11_PARSE(app, argc, argv);

  if (list) {
    for (const auto& c : criteria()) std::printf("%s\n", c.name.c_str());
    return 0;
  }
  bool matched = false;
  bool all_ok = true;
  for (const auto& c : criteria()) {
    if (!only.empty() && c.name != only) continue;
    matched = true;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.limit_seconds > 0 && secs > c.limit_seconds) {
      out.pass = false;
      out.detail += fmt(" [over time limit %.0fs]", c.limit_seconds);
    }
    std::printf("%s %s: %s (%.2fs)\n", out.pass ? "PASS" : "FAIL", c.name.c_str(), out.detail.c_str(), secs);
    std::fflush(stdout);
    all_ok = all_ok && out.pass;
  }
  if (!matched) {
    std::fprintf(stderr, "unknown criterion: %s\n", only.c_str());
    return 2;
  }
  return all_ok ? 0 : 1;
}
