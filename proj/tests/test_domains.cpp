#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "doctest.h"
#include "swapcomb/domains.hpp"
#include "swapcomb/error.hpp"

using namespace swapcomb;

namespace {

// Brute-force argmax over an enumeration sorted lexicographically; the first
// strict improvement wins, so ties resolve to the smallest bit vector.
Action brute_lmo(const std::vector<Action>& all, const std::vector<double>& w) {
  const Action* best = &all.front();
  double bv = best->dot(w);
  for (const auto& a : all) {
    const double v = a.dot(w);
    if (v > bv) {
      bv = v;
      best = &a;
    }
  }
  return *best;
}

Dag random_dag(std::mt19937_64& gen, std::size_t n, double density) {
  std::bernoulli_distribution coin(density);
  std::vector<Edge> edges;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) {
      if (coin(gen) || v == u + 1) edges.emplace_back(u, v);
    }
  }
  std::shuffle(edges.begin(), edges.end(), gen);
  return Dag(n, edges, 0, n - 1);
}

UndirectedGraph complete_graph(std::size_t n) {
  UndirectedGraph g{n, {}};
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) g.edges.emplace_back(u, v);
  }
  return g;
}

std::vector<ActionSet> test_domains() {
  std::vector<ActionSet> out;
  out.push_back(ActionSet::m_sets(5, 2));
  out.push_back(ActionSet::m_sets(6, 3));
  out.push_back(ActionSet::m_sets(4, 1));
  out.push_back(ActionSet::dag_paths(build_shortcut_dag(2)));
  out.push_back(ActionSet::dag_paths(build_shortcut_dag(3), false));
  std::mt19937_64 gen(5);
  out.push_back(ActionSet::dag_paths(random_dag(gen, 7, 0.5)));
  out.push_back(ActionSet::dag_paths(random_dag(gen, 6, 0.6), false));
  out.push_back(ActionSet::spanning_trees(complete_graph(4)));
  out.push_back(ActionSet::spanning_trees({5, {{0, 1}, {1, 2}, {2, 0}, {2, 3}, {3, 4}, {4, 2}, {0, 4}}}));
  out.push_back(ActionSet::k_forests(complete_graph(5), 2));
  out.push_back(ActionSet::k_forests({5, {{0, 1}, {1, 2}, {2, 0}, {2, 3}, {3, 4}}}, 3));
  out.push_back(ActionSet::permutations(3));
  out.push_back(ActionSet::permutations(4));
  out.push_back(ActionSet::truncated_permutations(2, 4));
  return out;
}

}  // namespace

TEST_CASE("lmo examples") {
  CHECK(ActionSet::m_sets(4, 2).lmo(std::vector<double>{5, 1, 3, 2}) == Action::from_string("1010"));

  // s=0, a=1, t=2; edge 0 is the shortcut.
  const Dag line(3, {{0, 2}, {0, 1}, {1, 2}}, 0, 2);
  const auto raw = ActionSet::dag_paths(line, false);
  CHECK(raw.lmo(std::vector<double>{1, 0, 0}) == Action::from_string("100"));
  const auto lev = ActionSet::dag_paths(line);
  std::vector<double> w(lev.dim(), 0.0);
  w[lev.leveled()->coordinate_of[0]] = 1.0;
  CHECK(lev.leveled()->project(lev.lmo(w)) == Action::from_string("100"));

  std::vector<double> diag(9, 0.0);
  for (int i = 0; i < 3; ++i) diag[i * 3 + i] = 10.0;
  CHECK(ActionSet::permutations(3).lmo(diag) == Action::from_string("100010001"));
}

TEST_CASE("lmo matches brute force with the lexicographic tie-break") {
  std::mt19937_64 gen(17);
  std::uniform_int_distribution<int> small(-2, 2);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (const auto& set : test_domains()) {
    CAPTURE(set.describe());
    const auto all = set.enumerate(100000);
    REQUIRE(!all.empty());
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<double> w(set.dim());
      for (auto& x : w) x = trial % 2 == 0 ? small(gen) : gauss(gen);
      if (trial == 0) std::fill(w.begin(), w.end(), 0.0);
      const Action got = set.lmo(w);
      CHECK(set.contains(got));
      CHECK(got.to_string() == brute_lmo(all, w).to_string());
    }
  }
}

TEST_CASE("enumeration is sorted, unique, members only, and consistent with counts") {
  for (const auto& set : test_domains()) {
    CAPTURE(set.describe());
    const auto all = set.enumerate(100000);
    for (std::size_t i = 1; i < all.size(); ++i) CHECK(all[i - 1] < all[i]);
    for (const auto& a : all) {
      CHECK(set.contains(a));
      if (set.fixed_weight()) CHECK(a.weight() == set.weight());
    }
    if (auto c = set.count()) CHECK(*c == static_cast<double>(all.size()));
  }
  const auto two3 = ActionSet::m_sets(3, 2).enumerate(10);
  REQUIRE(two3.size() == 3);
  CHECK(two3[0].to_string() == "011");
  CHECK(two3[1].to_string() == "101");
  CHECK(two3[2].to_string() == "110");
  CHECK(ActionSet::dag_paths(build_shortcut_dag(2)).enumerate(100).size() == 5);
  UndirectedGraph tri{3, {{0, 1}, {1, 2}, {0, 2}}};
  CHECK(ActionSet::spanning_trees(tri).enumerate(10).size() == 3);
  CHECK(ActionSet::permutations(4).count() == 24.0);
  CHECK(ActionSet::truncated_permutations(2, 4).count() == 12.0);
  CHECK(count_spanning_trees(complete_graph(5)) == 125.0);
}

TEST_CASE("enumeration guard") {
  CHECK_THROWS_AS(ActionSet::m_sets(30, 15).enumerate(1000), Error);
  try {
    ActionSet::permutations(8).enumerate(100);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kTooLarge);
  }
  CHECK_THROWS_AS(ActionSet::k_forests(complete_graph(7), 3).enumerate(10), Error);
}

TEST_CASE("infeasible domains") {
  UndirectedGraph disconnected{4, {{0, 1}, {2, 3}}};
  try {
    ActionSet::spanning_trees(disconnected);
    FAIL("expected InfeasibleDomain");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInfeasibleDomain);
  }
  CHECK_THROWS_AS(Dag(3, {{0, 1}, {1, 0}, {1, 2}}, 0, 2), Error);
  CHECK_THROWS_AS(Dag(3, {{1, 0}}, 0, 2), Error);
}

TEST_CASE("dag pruning drops edges on no source-sink path") {
  // 3 is a dead end; 4 is unreachable from the source.
  const Dag g(5, {{0, 1}, {1, 2}, {1, 3}, {4, 2}, {0, 2}}, 0, 2);
  CHECK(g.num_edges() == 3);
  CHECK(g.kept_edges() == std::vector<std::size_t>{0, 1, 4});
}

TEST_CASE("shortcut DAG structure") {
  for (std::size_t n = 1; n <= 8; ++n) {
    CAPTURE(n);
    const Dag g = build_shortcut_dag(n);
    CHECK(g.num_vertices() == 2 * n + 2);
    CHECK(g.num_edges() == 4 * n + 1);
    const auto set = ActionSet::dag_paths(g, false);
    const auto all = set.enumerate(1000);
    CHECK(all.size() == (std::size_t{1} << n) + 1);
    std::vector<std::size_t> usage(g.num_edges(), 0);
    std::map<std::size_t, std::size_t> by_length;
    for (const auto& a : all) {
      ++by_length[a.weight()];
      for (std::size_t e : a.ones()) ++usage[e];
    }
    CHECK(by_length[1] == 1);
    CHECK(by_length[n + 1] == (std::size_t{1} << n));
    CHECK(usage[0] == 1);
    const std::size_t half = std::size_t{1} << (n - 1);
    CHECK(usage[1] == half);
    CHECK(usage[2] == half);
    CHECK(usage[g.num_edges() - 2] == half);
    CHECK(usage[g.num_edges() - 1] == half);
    for (std::size_t e = 3; e + 2 < g.num_edges(); ++e) CHECK(usage[e] == (std::size_t{1} << (n - 2)));
  }
  CHECK(build_shortcut_dag(3).num_vertices() == 8);
  CHECK(build_shortcut_dag(3).num_edges() == 13);
}

TEST_CASE("equalize_path_lengths") {
  SUBCASE("already level graph is unchanged") {
    const Dag g(4, {{0, 1}, {0, 2}, {1, 3}, {2, 3}}, 0, 3);
    const auto lev = equalize_path_lengths(g);
    CHECK(lev.padding_vertices == 0);
    CHECK(lev.padding_edges == 0);
    CHECK(lev.dag.edges() == g.edges());
  }
  SUBCASE("single shortcut gets one padding vertex") {
    const Dag g(3, {{0, 2}, {0, 1}, {1, 2}}, 0, 2);
    const auto lev = equalize_path_lengths(g);
    CHECK(lev.padding_vertices == 1);
    CHECK(lev.path_length == 2);
    const auto set = ActionSet::dag_paths(g);
    for (const auto& a : set.enumerate(10)) CHECK(a.weight() == 2);
  }
  SUBCASE("shortcut n=2 and random DAGs") {
    std::vector<Dag> graphs{build_shortcut_dag(2), build_shortcut_dag(5)};
    std::mt19937_64 gen(23);
    for (int i = 0; i < 30; ++i) graphs.push_back(random_dag(gen, 4 + i % 5, 0.4 + 0.02 * i));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (const auto& g : graphs) {
      const auto lev = equalize_path_lengths(g);
      const std::size_t k = g.max_path_length();
      CHECK(lev.path_length == k);
      CHECK(lev.dag.min_path_length() == k);
      CHECK(lev.dag.max_path_length() == k);
      CHECK(lev.dag.path_count() == g.path_count());
      const std::size_t bound = k >= 2 ? (k - 2) * (g.num_vertices() - 2) + 1 : 1;
      CAPTURE(k);
      CAPTURE(g.num_vertices());
      CHECK(lev.padding_vertices <= bound);
      CHECK(lev.padding_edges <= bound + k);
      // Reward of each padded path equals the reward of its original path.
      std::vector<double> r(g.num_edges());
      for (auto& x : r) x = u(gen);
      const auto lifted = lev.lift(r);
      const auto padded = ActionSet::dag_paths(g);
      const auto raw = ActionSet::dag_paths(g, false);
      const auto raw_all = raw.enumerate(100000);
      std::vector<Action> projected;
      for (const auto& a : padded.enumerate(100000)) {
        const Action orig = lev.project(a);
        CHECK(raw.contains(orig));
        CHECK(a.dot(lifted) == doctest::Approx(orig.dot(r)).epsilon(1e-12));
        projected.push_back(orig);
      }
      std::sort(projected.begin(), projected.end());
      CHECK(projected == raw_all);
    }
  }
}

TEST_CASE("shortcut n=2 padding respects the vertex bound") {
  const auto lev = equalize_path_lengths(build_shortcut_dag(2));
  CHECK(lev.path_length == 3);
  CHECK(lev.padding_vertices <= (3 - 2) * (6 - 2) + 1);
  CHECK(lev.coordinate_of[0] == 0);
}

TEST_CASE("uniform marginal and co-occurrence match enumeration") {
  for (const auto& set : test_domains()) {
    CAPTURE(set.describe());
    const auto all = set.enumerate(100000);
    const double w = 1.0 / static_cast<double>(all.size());
    Vector marg(set.dim(), 0.0);
    SymMatrix sigma(set.dim());
    for (const auto& a : all) {
      for (std::size_t i : a.ones()) marg[i] += w;
      sigma.add_outer(a, w);
    }
    const auto um = set.uniform_marginal();
    const auto us = set.uniform_co_occurrence();
    for (std::size_t i = 0; i < set.dim(); ++i) {
      CHECK(um[i] == doctest::Approx(marg[i]).epsilon(1e-12));
      for (std::size_t j = 0; j < set.dim(); ++j) CHECK(std::abs(us(i, j) - sigma(i, j)) < 1e-12);
    }
  }
}

TEST_CASE("uniform sampling frequencies") {
  for (const auto& set : {ActionSet::m_sets(4, 2), ActionSet::dag_paths(build_shortcut_dag(2)),
                          ActionSet::permutations(3), ActionSet::truncated_permutations(2, 3),
                          ActionSet::spanning_trees(complete_graph(4))}) {
    CAPTURE(set.describe());
    const auto all = set.enumerate(1000);
    std::map<Action, int> hits;
    CounterRng rng(99);
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
      const Action a = set.sample_uniform(rng);
      REQUIRE(set.contains(a));
      ++hits[a];
    }
    CHECK(hits.size() == all.size());
    const double p = 1.0 / static_cast<double>(all.size());
    const double se = std::sqrt(p * (1 - p) / n);
    for (const auto& [a, c] : hits) CHECK(std::abs(c / static_cast<double>(n) - p) < 5 * se);
  }
}

TEST_CASE("read_dag parses the plain-text format") {
  std::istringstream in("4 5 0 3\n0 1\n0 2\n1 3\n2 3\n0 3\n");
  const Dag g = read_dag(in);
  CHECK(g.num_edges() == 5);
  CHECK(g.path_count() == 3.0);
  std::istringstream bad("4 5 0 3\n0 1\n");
  CHECK_THROWS_AS(read_dag(bad), Error);
}

TEST_CASE("lexicographic comparison of index sets") {
  const std::vector<std::size_t> a{1, 2}, b{0, 3}, c{1}, e{};
  CHECK(lex_less_index_sets(a, b));   // 0110 < 1001
  CHECK(!lex_less_index_sets(b, a));
  CHECK(lex_less_index_sets(c, a));   // 0100 < 0110
  CHECK(lex_less_index_sets(e, c));
  CHECK(!lex_less_index_sets(a, a));
}
