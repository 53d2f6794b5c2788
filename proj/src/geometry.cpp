#include "swapcomb/geometry.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "swapcomb/error.hpp"
#include "swapcomb/linalg.hpp"

namespace swapcomb {

namespace {

constexpr double kHullTol = 1e-7;
constexpr double kStepTol = 1e-9;
constexpr int kMaxCycles = 10000;
constexpr double kConvergedChange = 1e-9;
constexpr double kResidualLimit = 1e-6;
// Small steps alone are not enough: the equality blocks of path polytopes
// creep, so cycling continues until constraints are met this tightly too.
constexpr double kTargetResidual = 1e-12;
constexpr std::size_t kMaxSubsetVertices = 16;

bool is_forest_kind(DomainKind k) {
  return k == DomainKind::kSpanningTrees || k == DomainKind::kKForests;
}

std::vector<LinearConstraint> subset_constraints(const UndirectedGraph& g, double m) {
  const std::size_t n = g.num_vertices;
  if (n > kMaxSubsetVertices) {
    std::ostringstream os;
    os << "subset constraints need at most " << kMaxSubsetVertices << " vertices, got " << n;
    throw Error(ErrorCode::kTooLarge, os.str());
  }
  std::map<std::vector<std::size_t>, double> best;
  for (std::uint32_t s = 1; s < (1u << n); ++s) {
    const int size = std::popcount(s);
    if (size < 2) continue;
    std::vector<std::size_t> inside;
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
      if ((s >> g.edges[e].first & 1u) && (s >> g.edges[e].second & 1u)) inside.push_back(e);
    }
    if (inside.empty()) continue;
    const double rhs = (size - 1) / m;
    auto [it, fresh] = best.emplace(std::move(inside), rhs);
    if (!fresh) it->second = std::min(it->second, rhs);
  }
  std::vector<LinearConstraint> out;
  out.reserve(best.size());
  for (auto& [edges, rhs] : best) out.push_back({edges, {}, rhs, false});
  return out;
}

// Sorted-level decomposition of x in [0, s]^d with sum x = m s.
Policy decompose_msets(std::size_t m, Vector y) {
  const std::size_t d = y.size();
  double s = 1.0;
  std::vector<Atom> atoms;
  std::vector<std::size_t> order(d);
  for (std::size_t iter = 0; iter <= d + 1 && s > 1e-14; ++iter) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (y[a] != y[b]) return y[a] > y[b];
      return a < b;
    });
    double lambda = y[order[m - 1]];
    if (m < d) lambda = std::min(lambda, s - y[order[m]]);
    lambda = std::min(lambda, s);
    if (lambda <= 1e-15) break;
    Action a = Action::zeros(d);
    for (std::size_t i = 0; i < m; ++i) {
      a.set(order[i], true);
      y[order[i]] = std::max(0.0, y[order[i]] - lambda);
    }
    s -= lambda;
    atoms.push_back({std::move(a), lambda});
  }
  return Policy(std::move(atoms));
}

// Repeatedly remove the source-sink path of maximum bottleneck flow.
Policy decompose_flow(const Dag& g, Vector y) {
  const std::size_t nv = g.num_vertices();
  std::vector<Atom> atoms;
  const auto& topo = g.topological_order();
  for (std::size_t iter = 0; iter <= g.num_edges(); ++iter) {
    std::vector<double> bott(nv, -1.0);
    std::vector<std::size_t> via(nv, g.num_edges());
    bott[g.source()] = std::numeric_limits<double>::infinity();
    for (std::size_t v : topo) {
      if (bott[v] <= 0.0) continue;
      for (std::size_t e : g.out_edges()[v]) {
        const std::size_t w = g.edges()[e].second;
        const double b = std::min(bott[v], y[e]);
        if (b > bott[w]) {
          bott[w] = b;
          via[w] = e;
        }
      }
    }
    const double lambda = bott[g.sink()];
    if (lambda <= 1e-14) break;
    Action a = Action::zeros(g.num_edges());
    for (std::size_t v = g.sink(); v != g.source();) {
      const std::size_t e = via[v];
      a.set(e, true);
      y[e] = std::max(0.0, y[e] - lambda);
      v = g.edges()[e].first;
    }
    atoms.push_back({std::move(a), lambda});
  }
  return Policy(std::move(atoms));
}

// Birkhoff peeling: a perfect matching on the support, removed at the weight
// of its smallest cell.
Policy decompose_birkhoff(std::size_t n, Vector y) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<Atom> atoms;
  for (std::size_t iter = 0; iter <= n * n + 1; ++iter) {
    std::vector<double> cost(n * n);
    for (std::size_t c = 0; c < n * n; ++c) cost[c] = y[c] > 1e-14 ? -y[c] : kInf;
    const auto match = solve_assignment(n, n, cost);
    if (!match) break;
    double lambda = kInf;
    for (std::size_t i = 0; i < n; ++i) lambda = std::min(lambda, y[i * n + (*match)[i]]);
    if (lambda <= 1e-14) break;
    Action a = Action::zeros(n * n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t c = i * n + (*match)[i];
      a.set(c, true);
      y[c] = std::max(0.0, y[c] - lambda);
    }
    atoms.push_back({std::move(a), lambda});
  }
  return Policy(std::move(atoms));
}

// Peeling through the minimal face: the LMO on (sum of tight inequality
// normals) - (indicators of zero coordinates) returns a vertex of the face
// containing x; step as far as feasibility allows and renormalize.
Policy decompose_peeling(const ActionSet& set, Vector x) {
  const std::size_t d = set.dim();
  const double m = static_cast<double>(set.weight());
  auto cons = polytope_constraints(set);
  for (auto& c : cons) c.rhs *= m;  // x-space
  std::vector<Atom> atoms;
  double remaining = 1.0;
  for (std::size_t iter = 0; iter <= d + 1; ++iter) {
    Vector w(d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
      if (x[i] <= kStepTol) w[i] -= 1.0;
    }
    for (const auto& c : cons) {
      if (c.equality || c.rhs - c.lhs(x) > kStepTol) continue;
      for (std::size_t i : c.plus) w[i] += 1.0;
      for (std::size_t i : c.minus) w[i] -= 1.0;
    }
    Action v = set.lmo(w);
    const Vector vv(v.bits().begin(), v.bits().end());
    double lambda = 1.0;
    for (std::size_t i = 0; i < d; ++i) {
      if (v[i]) lambda = std::min(lambda, x[i]);
    }
    for (const auto& c : cons) {
      if (c.equality) continue;
      const double av = c.lhs(vv);
      if (c.rhs - av > 1e-12) lambda = std::min(lambda, (c.rhs - c.lhs(x)) / (c.rhs - av));
    }
    lambda = std::max(0.0, lambda);
    if (lambda <= 1e-14) break;
    atoms.push_back({v, lambda * remaining});
    if (lambda >= 1.0 - 1e-12) {
      remaining = 0.0;
      break;
    }
    for (std::size_t i = 0; i < d; ++i) {
      x[i] = std::max(0.0, (x[i] - lambda * v[i]) / (1.0 - lambda));
    }
    remaining *= 1.0 - lambda;
  }
  return Policy(std::move(atoms));
}

struct Workspace {
  std::vector<LinearConstraint> pool;
  std::vector<double> dual;  // Hildreth multipliers, one per pool entry
};

void apply(const LinearConstraint& c, double& dual, Vector& x) {
  double a = 0.0, b = 0.0;
  for (std::size_t i : c.plus) a += x[i];
  for (std::size_t i : c.minus) b += x[i];
  if (c.equality) {
    if (a <= 0.0) return;
    const double u = (c.rhs + std::sqrt(c.rhs * c.rhs + 4.0 * a * b)) / (2.0 * a);
    if (!(u > 0.0)) return;
    for (std::size_t i : c.plus) x[i] *= u;
    for (std::size_t i : c.minus) x[i] /= u;
    return;
  }
  if (a <= 0.0 || c.rhs <= 0.0) return;
  const double beta = std::log(c.rhs / a);
  const double step = std::min(dual, beta);
  if (step == 0.0) return;
  const double f = std::exp(step);
  for (std::size_t i : c.plus) x[i] *= f;
  dual -= step;
}

}  // namespace

double LinearConstraint::lhs(std::span<const double> q) const {
  double s = 0.0;
  for (std::size_t i : plus) s += q[i];
  for (std::size_t i : minus) s -= q[i];
  return s;
}

double LinearConstraint::violation(std::span<const double> q) const {
  const double diff = lhs(q) - rhs;
  return equality ? std::abs(diff) : std::max(0.0, diff);
}

std::vector<LinearConstraint> polytope_constraints(const ActionSet& set) {
  const std::size_t d = set.dim();
  const double m = static_cast<double>(set.weight());
  std::vector<LinearConstraint> out;
  std::vector<std::size_t> all(d);
  std::iota(all.begin(), all.end(), 0);
  switch (set.kind()) {
    case DomainKind::kMSets:
      out.push_back({all, {}, 1.0, true});
      for (std::size_t i = 0; i < d; ++i) out.push_back({{i}, {}, 1.0 / m, false});
      break;
    case DomainKind::kDagPaths: {
      const Dag& g = *set.dag();
      out.push_back({g.out_edges()[g.source()], {}, 1.0 / m, true});
      for (std::size_t v : g.topological_order()) {
        if (v == g.source() || v == g.sink()) continue;
        if (g.in_edges()[v].empty() && g.out_edges()[v].empty()) continue;
        out.push_back({g.in_edges()[v], g.out_edges()[v], 0.0, true});
      }
      break;
    }
    case DomainKind::kPermutations:
    case DomainKind::kTruncatedPermutations: {
      const auto [rows, cols] = set.matrix_shape();
      for (std::size_t i = 0; i < rows; ++i) {
        LinearConstraint c{{}, {}, 1.0 / m, true};
        for (std::size_t j = 0; j < cols; ++j) c.plus.push_back(i * cols + j);
        out.push_back(std::move(c));
      }
      const bool square = set.kind() == DomainKind::kPermutations;
      for (std::size_t j = 0; j < cols; ++j) {
        LinearConstraint c{{}, {}, 1.0 / m, square};
        for (std::size_t i = 0; i < rows; ++i) c.plus.push_back(i * cols + j);
        out.push_back(std::move(c));
      }
      break;
    }
    case DomainKind::kSpanningTrees:
    case DomainKind::kKForests: {
      out.push_back({all, {}, 1.0, true});
      auto sub = subset_constraints(*set.graph(), m);
      out.insert(out.end(), sub.begin(), sub.end());
      break;
    }
  }
  return out;
}

double polytope_violation(const ActionSet& set, std::span<const double> q) {
  double v = 0.0;
  for (double x : q) v = std::max(v, -x);
  for (const auto& c : polytope_constraints(set)) v = std::max(v, c.violation(q));
  return v;
}

Policy caratheodory_reduce(const Policy& p) {
  std::vector<Atom> atoms = p.atoms();
  if (atoms.empty()) return p;
  const std::size_t d = atoms.front().action.dim();
  // Affine dependencies among d + 2 atoms always exist; eliminate one atom
  // per round until none is left to find.
  for (;;) {
    const std::size_t k = atoms.size();
    if (k <= 1) break;
    // Rows: coordinates plus the all-ones row; columns: atoms.
    const std::size_t rows = d + 1;
    std::vector<std::vector<double>> a(rows, std::vector<double>(k, 0.0));
    for (std::size_t j = 0; j < k; ++j) {
      for (std::size_t i = 0; i < d; ++i) a[i][j] = atoms[j].action[i];
      a[d][j] = 1.0;
    }
    // Reduced row echelon form to find a null vector.
    std::vector<std::size_t> pivot_col;
    std::size_t r = 0;
    for (std::size_t c = 0; c < k && r < rows; ++c) {
      std::size_t piv = r;
      for (std::size_t i = r; i < rows; ++i) {
        if (std::abs(a[i][c]) > std::abs(a[piv][c])) piv = i;
      }
      if (std::abs(a[piv][c]) < 1e-10) continue;
      std::swap(a[piv], a[r]);
      const double inv = 1.0 / a[r][c];
      for (double& x : a[r]) x *= inv;
      for (std::size_t i = 0; i < rows; ++i) {
        if (i == r || a[i][c] == 0.0) continue;
        const double f = a[i][c];
        for (std::size_t j = 0; j < k; ++j) a[i][j] -= f * a[r][j];
      }
      pivot_col.push_back(c);
      ++r;
    }
    if (pivot_col.size() == k) break;  // affinely independent
    std::size_t free_col = 0;
    for (std::size_t c = 0, pi = 0; c < k; ++c) {
      if (pi < pivot_col.size() && pivot_col[pi] == c) {
        ++pi;
        continue;
      }
      free_col = c;
      break;
    }
    std::vector<double> alpha(k, 0.0);
    alpha[free_col] = 1.0;
    for (std::size_t i = 0; i < pivot_col.size(); ++i) alpha[pivot_col[i]] = -a[i][free_col];
    // Sum alpha = 0, so some entry is positive.
    double t = std::numeric_limits<double>::infinity();
    std::size_t drop = k;
    for (std::size_t j = 0; j < k; ++j) {
      if (alpha[j] > 1e-12 && atoms[j].weight / alpha[j] < t) {
        t = atoms[j].weight / alpha[j];
        drop = j;
      }
    }
    if (drop == k) break;
    for (std::size_t j = 0; j < k; ++j) atoms[j].weight = std::max(0.0, atoms[j].weight - t * alpha[j]);
    atoms[drop].weight = 0.0;
    atoms.erase(std::remove_if(atoms.begin(), atoms.end(), [](const Atom& x) { return x.weight <= 0.0; }),
                atoms.end());
  }
  Policy out(std::move(atoms));
  out.canonicalize();
  return out;
}

Policy decompose(const ActionSet& set, std::span<const double> q) {
  const std::size_t d = set.dim();
  if (q.size() != d) throw Error(ErrorCode::kInvalidArgument, "decompose: dimension mismatch");
  const double m = static_cast<double>(set.weight());
  Vector x(d);
  for (std::size_t i = 0; i < d; ++i) {
    if (q[i] < -1e-12) {
      std::ostringstream os;
      os << "decompose: negative coordinate q[" << i << "] = " << q[i];
      throw Error(ErrorCode::kNotInHull, os.str());
    }
    x[i] = std::max(0.0, m * q[i]);
  }

  Policy p;
  switch (set.kind()) {
    case DomainKind::kMSets:
      p = decompose_msets(set.weight(), x);
      break;
    case DomainKind::kDagPaths:
      p = decompose_flow(*set.dag(), x);
      break;
    case DomainKind::kPermutations:
      p = decompose_birkhoff(set.matrix_shape().first, x);
      break;
    default:
      p = decompose_peeling(set, x);
      break;
  }
  p.canonicalize();
  const double total = p.total_weight();
  if (!(total > 0.0)) throw Error(ErrorCode::kNotInHull, "decompose: no vertex found");
  std::vector<Atom> atoms = p.atoms();
  for (auto& a : atoms) a.weight /= total;
  p = Policy(std::move(atoms));
  if (p.size() > d + 1) p = caratheodory_reduce(p);

  const Vector rec = p.marginal();
  double res = 0.0;
  for (std::size_t i = 0; i < d; ++i) res = std::max(res, std::abs(rec[i] - x[i]));
  if (res > kHullTol) {
    std::ostringstream os;
    os << "decompose: residual " << res << " on " << set.describe();
    throw Error(ErrorCode::kNotInHull, os.str());
  }
  return p;
}

double generalized_kl(std::span<const double> q, std::span<const double> r) {
  double s = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i] > 0.0) s += q[i] * std::log(q[i] / r[i]);
    s += r[i] - q[i];
  }
  return s;
}

ProjectionResult kl_project_detailed(const ActionSet& set, std::span<const double> q_raw) {
  const std::size_t d = set.dim();
  if (q_raw.size() != d) throw Error(ErrorCode::kInvalidArgument, "kl_project: dimension mismatch");
  for (double v : q_raw) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::kInvalidArgument, "kl_project: entries must be positive and finite");
    }
  }
  ProjectionResult res;
  if (set.kind() == DomainKind::kMSets) {
    const double m = static_cast<double>(set.weight());
    // Capped simplex: q_i = min(1/m, alpha q_raw_i).
    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (q_raw[a] != q_raw[b]) return q_raw[a] > q_raw[b];
      return a < b;
    });
    double rest = std::accumulate(q_raw.begin(), q_raw.end(), 0.0);
    std::size_t capped = 0;
    double alpha = 1.0 / rest;
    for (; capped < d; ++capped) {
      alpha = (1.0 - static_cast<double>(capped) / m) / rest;
      if (alpha * q_raw[order[capped]] <= 1.0 / m) break;
      rest -= q_raw[order[capped]];
    }
    res.q.assign(d, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
      const std::size_t i = order[j];
      res.q[i] = j < capped ? 1.0 / m : alpha * q_raw[i];
    }
    res.cycles = 1;
    res.residual = polytope_violation(set, res.q);
    return res;
  }

  const auto all = polytope_constraints(set);
  const bool lazy = is_forest_kind(set.kind());
  Workspace ws;
  for (const auto& c : all) {
    if (!lazy || c.equality) {
      ws.pool.push_back(c);
      ws.dual.push_back(0.0);
    }
  }
  Vector x(q_raw.begin(), q_raw.end());
  int cycle = 0;
  for (; cycle < kMaxCycles; ++cycle) {
    const Vector prev = x;
    for (std::size_t j = 0; j < ws.pool.size(); ++j) apply(ws.pool[j], ws.dual[j], x);
    bool added = false;
    if (lazy) {
      for (const auto& c : all) {
        if (c.equality || c.violation(x) <= 1e-12) continue;
        const bool known = std::any_of(ws.pool.begin(), ws.pool.end(), [&](const LinearConstraint& p) {
          return !p.equality && p.plus == c.plus;
        });
        if (known) continue;
        ws.pool.push_back(c);
        ws.dual.push_back(0.0);
        added = true;
      }
    }
    double change = 0.0;
    for (std::size_t i = 0; i < d; ++i) change = std::max(change, std::abs(x[i] - prev[i]));
    if (!added && change < kConvergedChange) {
      double worst = 0.0;
      for (const auto& c : all) worst = std::max(worst, c.violation(x));
      if (worst <= kTargetResidual) {
        ++cycle;
        break;
      }
    }
  }
  res.q = std::move(x);
  res.cycles = cycle;
  res.residual = 0.0;
  for (const auto& c : all) res.residual = std::max(res.residual, c.violation(res.q));
  if (res.residual > kResidualLimit) {
    std::ostringstream os;
    os << "kl_project: no convergence on " << set.describe() << " after " << cycle
       << " cycles, residual " << res.residual;
    throw Error(ErrorCode::kNoConvergence, os.str());
  }
  return res;
}

Vector kl_project(const ActionSet& set, std::span<const double> q_raw) {
  return kl_project_detailed(set, q_raw).q;
}

}  // namespace swapcomb
