#include "swapcomb/spanner.hpp"

#include <cmath>

#include "swapcomb/error.hpp"
#include "swapcomb/linalg.hpp"

namespace swapcomb {

namespace {

Vector to_vector(const Action& a) { return Vector(a.bits().begin(), a.bits().end()); }

Vector coords(const std::vector<Vector>& u, const Action& a) {
  Vector x(u.size());
  for (std::size_t j = 0; j < u.size(); ++j) x[j] = a.dot(u[j]);
  return x;
}

// Component of v orthogonal to the current orthonormal set.
Vector residual(const std::vector<Vector>& u, Vector v) {
  for (int pass = 0; pass < 2; ++pass) {  // re-orthogonalize once for stability
    for (const auto& b : u) {
      const double p = dot(b, v);
      for (std::size_t i = 0; i < v.size(); ++i) v[i] -= p * b[i];
    }
  }
  return v;
}

class Oracle {
 public:
  explicit Oracle(const ActionSet& set) : set_(set) {}
  Action call(const Vector& w) {
    ++calls_;
    return set_.lmo(w);
  }
  Vector negate(Vector w) {
    for (double& x : w) x = -x;
    return w;
  }
  std::size_t calls() const { return calls_; }

 private:
  const ActionSet& set_;
  std::size_t calls_ = 0;
};

}  // namespace

Spanner build_spanner(const ActionSet& set, double C) {
  if (!(C > 1.0)) throw Error(ErrorCode::kInvalidArgument, "spanner needs C > 1");
  const std::size_t d = set.dim();
  const double tol = 1e-9 * std::sqrt(static_cast<double>(std::max<std::size_t>(1, set.weight())));
  Oracle oracle(set);

  // Orthonormal basis of span(A) from oracle sweeps along the coordinate
  // directions projected off the span found so far.
  std::vector<Vector> u;
  bool grew = true;
  while (grew && u.size() < d) {
    grew = false;
    for (std::size_t i = 0; i < d && u.size() < d; ++i) {
      for (;;) {
        Vector e(d, 0.0);
        e[i] = 1.0;
        const Vector w = residual(u, e);
        if (norm2(w) <= 1e-12) break;
        bool added = false;
        for (const Vector& dir : {w, oracle.negate(w)}) {
          Vector r = residual(u, to_vector(oracle.call(dir)));
          const double n = norm2(r);
          if (n > tol) {
            for (double& x : r) x /= n;
            u.push_back(std::move(r));
            added = true;
            break;
          }
        }
        if (!added) break;
        grew = true;
      }
    }
  }
  const std::size_t r = u.size();
  if (r == 0) throw Error(ErrorCode::kDegenerateSet, "action set spans only the origin");

  auto direction = [&](const Vector& c) {
    Vector w(d, 0.0);
    for (std::size_t j = 0; j < r; ++j) {
      for (std::size_t i = 0; i < d; ++i) w[i] += c[j] * u[j][i];
    }
    return w;
  };

  // cols[j]: r-coordinates of basis column j. g = B^{-T} e_j gives the
  // determinant ratio det(B with column j replaced by x) / det(B) = g . x.
  std::vector<Vector> cols(r, Vector(r, 0.0));
  for (std::size_t j = 0; j < r; ++j) cols[j][j] = 1.0;
  std::vector<Action> basis(r);
  std::size_t replacements = 0;

  auto best_for = [&](std::size_t j, Action& best, Vector& best_x) {
    Vector e(r, 0.0);
    e[j] = 1.0;
    const Vector g = LuDecomp(cols).solve_transpose(e);
    const Vector w = direction(g);
    double best_ratio = -1.0;
    for (const Vector& dir : {w, oracle.negate(w)}) {
      Action a = oracle.call(dir);
      Vector x = coords(u, a);
      const double ratio = std::abs(dot(g, x));
      if (ratio > best_ratio) {
        best_ratio = ratio;
        best = std::move(a);
        best_x = std::move(x);
      }
    }
    return best_ratio;
  };

  for (std::size_t j = 0; j < r; ++j) {
    Action a;
    Vector x;
    const double ratio = best_for(j, a, x);
    if (ratio <= 1e-12) {
      throw Error(ErrorCode::kDegenerateSet, "spanner initialization found a degenerate direction");
    }
    cols[j] = std::move(x);
    basis[j] = std::move(a);
  }

  const double threshold = C * (1.0 + 1e-12);
  bool improved = true;
  while (improved) {
    improved = false;
    for (std::size_t j = 0; j < r; ++j) {
      Action a;
      Vector x;
      if (best_for(j, a, x) > threshold) {
        cols[j] = std::move(x);
        basis[j] = std::move(a);
        ++replacements;
        improved = true;
        break;
      }
    }
  }

  Spanner sp;
  sp.C = C;
  sp.basis = std::move(basis);
  sp.rank = r;
  sp.span_basis = std::move(u);
  sp.oracle_calls = oracle.calls();
  sp.replacements = replacements;
  return sp;
}

Policy exploration_policy(const Spanner& sp) { return Policy::uniform(sp.basis); }

Vector spanner_coefficients(const Spanner& sp, const Action& m) {
  std::vector<Vector> cols;
  cols.reserve(sp.rank);
  for (const auto& b : sp.basis) cols.push_back(coords(sp.span_basis, b));
  return LuDecomp(cols).solve(coords(sp.span_basis, m));
}

}  // namespace swapcomb
