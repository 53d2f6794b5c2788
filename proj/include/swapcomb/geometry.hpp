#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "swapcomb/action.hpp"
#include "swapcomb/domains.hpp"

namespace swapcomb {

// One linear constraint of the scaled polytope P = conv(A)/m, written as
// sum_{i in plus} q_i - sum_{i in minus} q_i (== or <=) rhs.
struct LinearConstraint {
  std::vector<std::size_t> plus;
  std::vector<std::size_t> minus;
  double rhs = 0.0;
  bool equality = true;

  double lhs(std::span<const double> q) const;
  // Amount by which q violates the constraint (0 when satisfied).
  double violation(std::span<const double> q) const;
};

// Succinct description of P, nonnegativity implied. For trees and forests
// the exponential family of subset constraints is listed in full, so those
// kinds are limited to small vertex counts.
std::vector<LinearConstraint> polytope_constraints(const ActionSet& set);

// Maximum constraint violation of q with respect to P (nonnegativity
// included).
double polytope_violation(const ActionSet& set, std::span<const double> q);

// Distribution p over A with sum_M p(M) M = m q. Throws NotInHull when the
// reconstruction residual exceeds 1e-7.
Policy decompose(const ActionSet& set, std::span<const double> q);

// Reduce a distribution to at most rank + 1 atoms with the same mean.
Policy caratheodory_reduce(const Policy& p);

struct ProjectionResult {
  Vector q;
  int cycles = 0;
  double residual = 0.0;
};

// argmin_{q in P} of the generalized KL divergence to q_raw (entries > 0).
ProjectionResult kl_project_detailed(const ActionSet& set, std::span<const double> q_raw);
Vector kl_project(const ActionSet& set, std::span<const double> q_raw);

// sum q log(q/r) - q + r
double generalized_kl(std::span<const double> q, std::span<const double> r);

}  // namespace swapcomb
