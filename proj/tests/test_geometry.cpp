#include <cmath>
#include <random>

#include "doctest.h"
#include "swapcomb/error.hpp"
#include "swapcomb/geometry.hpp"

using namespace swapcomb;

namespace {

UndirectedGraph complete_graph(std::size_t n) {
  UndirectedGraph g{n, {}};
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) g.edges.emplace_back(u, v);
  }
  return g;
}

std::vector<ActionSet> geometry_domains() {
  std::vector<ActionSet> out;
  out.push_back(ActionSet::m_sets(3, 2));
  out.push_back(ActionSet::m_sets(6, 2));
  out.push_back(ActionSet::m_sets(7, 3));
  out.push_back(ActionSet::dag_paths(build_shortcut_dag(3)));
  out.push_back(ActionSet::dag_paths(Dag(5, {{0, 1}, {0, 2}, {1, 2}, {1, 3}, {2, 3}, {2, 4}, {3, 4}, {0, 4}}, 0, 4)));
  out.push_back(ActionSet::spanning_trees(complete_graph(4)));
  out.push_back(ActionSet::spanning_trees({5, {{0, 1}, {1, 2}, {2, 0}, {2, 3}, {3, 4}, {4, 2}, {0, 4}}}));
  out.push_back(ActionSet::k_forests(complete_graph(5), 2));
  out.push_back(ActionSet::k_forests({5, {{0, 1}, {1, 2}, {2, 0}, {2, 3}, {3, 4}}}, 3));
  out.push_back(ActionSet::permutations(3));
  out.push_back(ActionSet::permutations(4));
  out.push_back(ActionSet::truncated_permutations(2, 4));
  out.push_back(ActionSet::truncated_permutations(3, 4));
  return out;
}

// m q for a random convex combination of a random subset of vertices.
Vector random_hull_point(const std::vector<Action>& all, std::mt19937_64& gen, std::size_t d) {
  std::uniform_int_distribution<std::size_t> pick(0, all.size() - 1);
  std::exponential_distribution<double> ex(1.0);
  const std::size_t k = 1 + pick(gen) % std::min<std::size_t>(all.size(), 2 * d);
  Vector x(d, 0.0);
  double tot = 0.0;
  std::vector<std::pair<std::size_t, double>> parts;
  for (std::size_t j = 0; j < k; ++j) {
    const double w = ex(gen);
    parts.emplace_back(pick(gen), w);
    tot += w;
  }
  for (const auto& [i, w] : parts) {
    for (std::size_t c : all[i].ones()) x[c] += w / tot;
  }
  return x;
}

Vector scaled(Vector x, double f) {
  for (double& v : x) v *= f;
  return x;
}

double reconstruction_error(const Policy& p, const Vector& target) {
  const Vector rec = p.marginal();
  double e = 0.0;
  for (std::size_t i = 0; i < rec.size(); ++i) e = std::max(e, std::abs(rec[i] - target[i]));
  return e;
}

}  // namespace

TEST_CASE("decompose examples") {
  const auto two3 = ActionSet::m_sets(3, 2);
  const auto center = decompose(two3, Vector{1.0 / 3, 1.0 / 3, 1.0 / 3});
  REQUIRE(center.size() == 3);
  for (const auto& a : center.atoms()) CHECK(a.weight == doctest::Approx(1.0 / 3.0));
  const auto vertex = decompose(two3, Vector{0.5, 0.5, 0.0});
  REQUIRE(vertex.size() == 1);
  CHECK(vertex.atoms()[0].action.to_string() == "110");
  CHECK(vertex.atoms()[0].weight == doctest::Approx(1.0));

  const auto perm = ActionSet::permutations(3);
  const auto bvn = decompose(perm, Vector(9, 1.0 / 9.0));
  CHECK(reconstruction_error(bvn, Vector(9, 1.0 / 3.0)) < 1e-12);
  CHECK(bvn.size() <= 10);
  for (const auto& a : bvn.atoms()) CHECK(perm.contains(a.action));
}

TEST_CASE("decompose round-trips random hull points") {
  std::mt19937_64 gen(41);
  for (const auto& set : geometry_domains()) {
    CAPTURE(set.describe());
    const auto all = set.enumerate(100000);
    const double m = static_cast<double>(set.weight());
    std::size_t max_support = 0;
    for (int trial = 0; trial < 200; ++trial) {
      const Vector x = random_hull_point(all, gen, set.dim());
      const Policy p = decompose(set, scaled(x, 1.0 / m));
      CHECK(reconstruction_error(p, x) <= 1e-7);
      CHECK(p.size() <= set.dim() + 1);
      CHECK(std::abs(p.total_weight() - 1.0) < 1e-9);
      for (const auto& a : p.atoms()) {
        CHECK(set.contains(a.action));
        CHECK(a.weight >= 0.0);
      }
      max_support = std::max(max_support, p.size());
    }
    MESSAGE(set.describe() << " max support " << max_support);
  }
}

TEST_CASE("a vertex decomposes to a point mass on itself") {
  for (const auto& set : geometry_domains()) {
    CAPTURE(set.describe());
    const double m = static_cast<double>(set.weight());
    for (const auto& a : set.enumerate(100000)) {
      const Vector q = scaled(Vector(a.bits().begin(), a.bits().end()), 1.0 / m);
      const Policy p = decompose(set, q);
      REQUIRE(p.size() == 1);
      CHECK(p.atoms()[0].action == a);
    }
  }
}

TEST_CASE("decompose rejects points outside the hull") {
  CHECK_THROWS_AS(decompose(ActionSet::m_sets(3, 2), Vector{0.9, 0.05, 0.05}), Error);
  CHECK_THROWS_AS(decompose(ActionSet::permutations(2), Vector{0.5, 0.5, 0.0, 0.0}), Error);
  CHECK_THROWS_AS(decompose(ActionSet::m_sets(3, 2), Vector{0.6, 0.6, -0.2}), Error);
}

TEST_CASE("caratheodory reduction keeps the mean") {
  const auto set = ActionSet::m_sets(4, 2);
  const auto all = set.enumerate(10);
  const Policy p = Policy::uniform(all);  // 6 atoms, affine rank 4
  const Policy r = caratheodory_reduce(p);
  CHECK(r.size() <= 4);
  CHECK(reconstruction_error(r, p.marginal()) < 1e-12);
}

TEST_CASE("m-set projection examples") {
  const auto set = ActionSet::m_sets(3, 2);
  const auto q = kl_project(set, Vector{0.8, 0.1, 0.1});
  CHECK(q[0] == doctest::Approx(0.5));
  CHECK(q[1] == doctest::Approx(0.25));
  CHECK(q[2] == doctest::Approx(0.25));
  const auto u = kl_project(ActionSet::m_sets(5, 2), Vector(5, 0.2));
  for (double v : u) CHECK(std::abs(v - 0.2) < 1e-15);
}

TEST_CASE("projection fixed points and membership certificates") {
  std::mt19937_64 gen(43);
  std::uniform_real_distribution<double> logu(-3.0, 3.0);
  for (const auto& set : geometry_domains()) {
    CAPTURE(set.describe());
    const auto all = set.enumerate(100000);
    const double m = static_cast<double>(set.weight());
    for (int trial = 0; trial < 30; ++trial) {
      // Interior points are fixed; perturb away from zero for strict positivity.
      Vector x = random_hull_point(all, gen, set.dim());
      const Vector center = set.uniform_marginal();
      for (std::size_t i = 0; i < x.size(); ++i) x[i] = 0.5 * x[i] + 0.5 * center[i];
      const Vector q = scaled(x, 1.0 / m);
      const auto proj = kl_project(set, q);
      for (std::size_t i = 0; i < q.size(); ++i) CHECK(std::abs(proj[i] - q[i]) <= 1e-10);

      Vector raw(set.dim());
      for (double& v : raw) v = std::exp(logu(gen)) / static_cast<double>(set.dim());
      const auto res = kl_project_detailed(set, raw);
      CHECK(res.residual <= 1e-6);
      CHECK_NOTHROW(decompose(set, res.q));
    }
  }
}

TEST_CASE("projection is optimal against feasible points (Pythagorean inequality)") {
  std::mt19937_64 gen(47);
  std::uniform_real_distribution<double> logu(-2.0, 2.0);
  for (const auto& set : geometry_domains()) {
    CAPTURE(set.describe());
    const auto all = set.enumerate(100000);
    const double m = static_cast<double>(set.weight());
    for (int trial = 0; trial < 10; ++trial) {
      Vector raw(set.dim());
      for (double& v : raw) v = std::exp(logu(gen)) / static_cast<double>(set.dim());
      const auto star = kl_project(set, raw);
      const double best = generalized_kl(star, raw);
      for (int k = 0; k < 50; ++k) {
        const Vector z = scaled(random_hull_point(all, gen, set.dim()), 1.0 / m);
        const double kz = generalized_kl(z, raw);
        CHECK(best <= kz + 1e-8);
        CHECK(kz >= generalized_kl(z, star) + best - 1e-6);
      }
    }
  }
}

TEST_CASE("m-set projection beats a dense grid over P") {
  std::mt19937_64 gen(53);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  const double h = 1e-3;
  for (const auto& [d, m] : std::vector<std::pair<std::size_t, std::size_t>>{{3, 2}, {3, 1}, {4, 2}}) {
    for (int trial = 0; trial < (d == 3 ? 5 : 1); ++trial) {
      Vector raw(d);
      for (double& v : raw) v = u(gen);
      const auto set = ActionSet::m_sets(d, m);
      const auto q = kl_project(set, raw);
      const double cap = 1.0 / static_cast<double>(m);
      double grid_min = std::numeric_limits<double>::infinity();
      const int steps = static_cast<int>(std::round(cap / h));
      Vector z(d);
      if (d == 3) {
        for (int a = 0; a <= steps; ++a) {
          for (int b = 0; b <= steps; ++b) {
            z[0] = a * h;
            z[1] = b * h;
            z[2] = 1.0 - z[0] - z[1];
            if (z[2] < -1e-12 || z[2] > cap + 1e-12) continue;
            grid_min = std::min(grid_min, generalized_kl(z, raw));
          }
        }
      } else {
        for (int a = 0; a <= steps; ++a) {
          for (int b = 0; b <= steps; ++b) {
            for (int c = 0; c <= steps; ++c) {
              z[0] = a * h;
              z[1] = b * h;
              z[2] = c * h;
              z[3] = 1.0 - z[0] - z[1] - z[2];
              if (z[3] < -1e-12 || z[3] > cap + 1e-12) continue;
              grid_min = std::min(grid_min, generalized_kl(z, raw));
            }
          }
        }
      }
      CHECK(generalized_kl(q, raw) <= grid_min + 1e-6);
    }
  }
}

TEST_CASE("initial uniform point and the polytope") {
  // Uniform q is in P for m-sets and permutations but not for a general DAG.
  CHECK(polytope_violation(ActionSet::m_sets(5, 2), Vector(5, 0.2)) < 1e-15);
  CHECK(polytope_violation(ActionSet::permutations(3), Vector(9, 1.0 / 9)) < 1e-15);
  const auto dag = ActionSet::dag_paths(build_shortcut_dag(3));
  const Vector uni(dag.dim(), 1.0 / static_cast<double>(dag.dim()));
  CHECK(polytope_violation(dag, uni) > 1e-3);
  const auto q0 = kl_project(dag, uni);
  CHECK(polytope_violation(dag, q0) < 1e-6);
  CHECK_NOTHROW(decompose(dag, q0));
}
