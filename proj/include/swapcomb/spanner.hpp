#pragma once

#include <cstddef>
#include <vector>

#include "swapcomb/action.hpp"
#include "swapcomb/domains.hpp"

namespace swapcomb {

// C-approximate barycentric spanner of an action set. Every action is a
// combination of `basis` with coefficients bounded by C in absolute value.
struct Spanner {
  double C = 2.0;
  std::vector<Action> basis;
  std::size_t rank = 0;
  // Orthonormal basis of span(A), d-vectors; actions are handled through
  // their coordinates in this basis.
  std::vector<Vector> span_basis;
  std::size_t oracle_calls = 0;
  std::size_t replacements = 0;
};

Spanner build_spanner(const ActionSet& set, double C = 2.0);

// Uniform over the basis actions.
Policy exploration_policy(const Spanner& sp);

// Coefficients a with sum_j a_j basis_j = M, for M in span(A).
Vector spanner_coefficients(const Spanner& sp, const Action& m);

}  // namespace swapcomb
