#include <cmath>
#include <random>

#include "doctest.h"
#include "swapcomb/error.hpp"
#include "swapcomb/linalg.hpp"
#include "swapcomb/spanner.hpp"

using namespace swapcomb;

namespace {

UndirectedGraph complete_graph(std::size_t n) {
  UndirectedGraph g{n, {}};
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) g.edges.emplace_back(u, v);
  }
  return g;
}

std::vector<ActionSet> spanner_domains() {
  std::vector<ActionSet> out;
  for (std::size_t d = 2; d <= 8; ++d) {
    for (std::size_t m = 1; m < d; ++m) out.push_back(ActionSet::m_sets(d, m));
  }
  for (std::size_t n = 1; n <= 4; ++n) {
    out.push_back(ActionSet::dag_paths(build_shortcut_dag(n)));
    out.push_back(ActionSet::dag_paths(build_shortcut_dag(n), false));
  }
  for (std::size_t n = 2; n <= 4; ++n) out.push_back(ActionSet::permutations(n));
  out.push_back(ActionSet::truncated_permutations(2, 4));
  out.push_back(ActionSet::spanning_trees(complete_graph(4)));
  out.push_back(ActionSet::k_forests(complete_graph(5), 2));
  return out;
}

}  // namespace

TEST_CASE("2-sets of 3: the spanner is the whole action set") {
  const auto set = ActionSet::m_sets(3, 2);
  const auto sp = build_spanner(set, 2.0);
  CHECK(sp.rank == 3);
  auto basis = sp.basis;
  std::sort(basis.begin(), basis.end());
  CHECK(basis == set.enumerate(10));
  for (const auto& a : set.enumerate(10)) {
    const auto coef = spanner_coefficients(sp, a);
    double ones = 0.0, rest = 0.0;
    for (double c : coef) {
      if (std::abs(c - 1.0) < 1e-12) ones += 1.0; else rest = std::max(rest, std::abs(c));
    }
    CHECK(ones == 1.0);
    CHECK(rest < 1e-12);
  }
  const auto mu = exploration_policy(sp);
  for (const auto& at : mu.atoms()) CHECK(at.weight == doctest::Approx(1.0 / 3.0));
  CHECK(min_nonzero_eigenvalue(co_occurrence(mu)) == doctest::Approx(1.0 / 3.0));
  CHECK(1.0 / 3.0 >= 1.0 / (4.0 * 27.0));
}

TEST_CASE("1-sets: unit vectors, exact spanner") {
  const auto set = ActionSet::m_sets(4, 1);
  const auto sp = build_spanner(set, 2.0);
  CHECK(sp.rank == 4);
  const auto sigma = co_occurrence(exploration_policy(sp));
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) CHECK(sigma(i, j) == doctest::Approx(i == j ? 0.25 : 0.0));
  }
  for (const auto& a : set.enumerate(10)) {
    for (double c : spanner_coefficients(sp, a)) CHECK(std::abs(c) <= 1.0 + 1e-12);
  }
}

TEST_CASE("spanner invariants on enumerable domains") {
  for (const auto& set : spanner_domains()) {
    CAPTURE(set.describe());
    const auto sp = build_spanner(set, 2.0);
    const auto all = set.enumerate(100000);
    // Rank equals the dimension of span(A), measured independently.
    const auto eig_u = eigen_sym(set.uniform_co_occurrence());
    CHECK(sp.rank == numerical_rank(eig_u));
    CHECK(sp.basis.size() == sp.rank);
    for (const auto& b : sp.basis) CHECK(set.contains(b));
    // Linear independence of the basis.
    SymMatrix gram(sp.rank);
    for (std::size_t i = 0; i < sp.rank; ++i) {
      for (std::size_t j = i; j < sp.rank; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < set.dim(); ++k) s += sp.basis[i][k] * sp.basis[j][k];
        gram.set(i, j, s);
      }
    }
    CHECK(eigen_sym(gram).values.back() > 1e-9);
    // Coefficient bound, with the reconstruction verified in the ambient space.
    for (const auto& a : all) {
      const auto coef = spanner_coefficients(sp, a);
      double worst = 0.0;
      for (std::size_t i = 0; i < set.dim(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < sp.rank; ++j) s += coef[j] * sp.basis[j][i];
        worst = std::max(worst, std::abs(s - a[i]));
      }
      CHECK(worst < 1e-9);
      CHECK(norm_inf(coef) <= 2.0 + 1e-6);
    }
    const double d = static_cast<double>(set.dim());
    const auto eig = eigen_sym(co_occurrence(exploration_policy(sp)));
    const double restricted = min_nonzero_eigenvalue(eig);
    const double full = std::max(0.0, eig.values.back());
    CAPTURE(restricted);
    CAPTURE(full);
    CHECK(restricted >= 1.0 / (4.0 * d * d * d));
    if (sp.rank == set.dim()) CHECK(full == doctest::Approx(restricted));
    CHECK(static_cast<double>(sp.oracle_calls) <= 10.0 * d * d * std::log(std::max(d, 2.0)) + 4.0 * d);
  }
}

TEST_CASE("spanner construction is deterministic") {
  const auto set = ActionSet::dag_paths(build_shortcut_dag(3));
  const auto a = build_spanner(set, 2.0);
  const auto b = build_spanner(set, 2.0);
  CHECK(a.basis == b.basis);
  CHECK(a.oracle_calls == b.oracle_calls);
}

TEST_CASE("shortcut spanner contains the shortcut path") {
  for (std::size_t n : {3, 8}) {
    const auto set = ActionSet::dag_paths(build_shortcut_dag(n));
    const auto sp = build_spanner(set, 2.0);
    bool found = false;
    for (const auto& b : sp.basis) found = found || b[set.leveled()->coordinate_of[0]] == 1;
    CHECK(found);
  }
}

TEST_CASE("spanner argument validation") {
  CHECK_THROWS_AS(build_spanner(ActionSet::m_sets(3, 1), 1.0), Error);
}
