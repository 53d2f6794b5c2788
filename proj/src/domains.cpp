#include "swapcomb/domains.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>

#include "swapcomb/error.hpp"

namespace swapcomb {

namespace {

constexpr std::size_t kUniformEnumerationCap = 1000000;

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[b] = a;
    return true;
  }
};

bool acyclic_edges(const UndirectedGraph& g, const Action& a) {
  UnionFind uf(g.num_vertices);
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    if (a[e] && !uf.unite(g.edges[e].first, g.edges[e].second)) return false;
  }
  return true;
}

void validate_graph(const UndirectedGraph& g) {
  for (const auto& [u, v] : g.edges) {
    if (u >= g.num_vertices || v >= g.num_vertices || u == v) {
      std::ostringstream os;
      os << "invalid undirected edge (" << u << ", " << v << ")";
      throw Error(ErrorCode::kInvalidArgument, os.str());
    }
  }
}

// Greedy over the graphic matroid truncated at `target` edges. Ties go to
// the higher index, which yields the lexicographically smallest indicator.
Action kruskal(const UndirectedGraph& g, std::span<const double> w, std::size_t target) {
  std::vector<std::size_t> order(g.edges.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (w[a] != w[b]) return w[a] > w[b];
    return a > b;
  });
  UnionFind uf(g.num_vertices);
  Action out = Action::zeros(g.edges.size());
  std::size_t taken = 0;
  for (std::size_t e : order) {
    if (taken == target) break;
    if (uf.unite(g.edges[e].first, g.edges[e].second)) {
      out.set(e, true);
      ++taken;
    }
  }
  if (taken < target) {
    throw Error(ErrorCode::kInfeasibleDomain, "graph has no acyclic edge set of the required size");
  }
  return out;
}

void enumerate_forests(const UndirectedGraph& g, std::size_t target, std::size_t cap,
                       std::vector<Action>& out) {
  const std::size_t d = g.edges.size();
  Action cur = Action::zeros(d);
  std::function<void(std::size_t, std::size_t, const UnionFind&)> rec =
      [&](std::size_t e, std::size_t taken, const UnionFind& uf) {
        if (taken == target) {
          if (out.size() >= cap) {
            throw Error(ErrorCode::kTooLarge, "action set exceeds enumeration cap");
          }
          out.push_back(cur);
          return;
        }
        if (d - e < target - taken) return;
        UnionFind with = uf;
        if (with.unite(g.edges[e].first, g.edges[e].second)) {
          cur.set(e, true);
          rec(e + 1, taken + 1, with);
          cur.set(e, false);
        }
        rec(e + 1, taken, uf);
      };
  rec(0, 0, UnionFind(g.num_vertices));
}

double log_falling(std::size_t n, std::size_t k) {
  double s = 0.0;
  for (std::size_t i = 0; i < k; ++i) s += std::log(static_cast<double>(n - i));
  return s;
}

double binomial(std::size_t n, std::size_t k) {
  return std::round(std::exp(log_falling(n, k) - std::lgamma(static_cast<double>(k) + 1.0)));
}

void check_weights(std::span<const double> w, std::size_t d) {
  if (w.size() != d) throw Error(ErrorCode::kInvalidArgument, "weight vector has wrong dimension");
  for (double x : w) {
    if (!std::isfinite(x)) throw Error(ErrorCode::kInvalidArgument, "non-finite oracle weight");
  }
}

}  // namespace

bool lex_less_index_sets(std::span<const std::size_t> a, std::span<const std::size_t> b) {
  // Indicator vectors compare at the first index in the symmetric difference;
  // the set owning that index has a 1 there and is the larger one.
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) {
      ++i;
      ++j;
    } else {
      return a[i] > b[j];
    }
  }
  return i == a.size() && j < b.size();
}

const char* to_string(DomainKind kind) {
  switch (kind) {
    case DomainKind::kMSets: return "m_sets";
    case DomainKind::kDagPaths: return "dag_paths";
    case DomainKind::kSpanningTrees: return "spanning_trees";
    case DomainKind::kKForests: return "k_forests";
    case DomainKind::kPermutations: return "permutations";
    case DomainKind::kTruncatedPermutations: return "truncated_permutations";
  }
  return "unknown";
}

std::optional<std::vector<std::size_t>> solve_assignment(std::size_t rows, std::size_t cols,
                                                          std::span<const double> cost) {
  if (rows > cols) throw Error(ErrorCode::kInvalidArgument, "assignment needs rows <= cols");
  constexpr double kInf = std::numeric_limits<double>::infinity();
  auto a = [&](std::size_t i, std::size_t j) { return cost[(i - 1) * cols + (j - 1)]; };
  std::vector<double> u(rows + 1, 0.0), v(cols + 1, 0.0);
  std::vector<std::size_t> p(cols + 1, 0), way(cols + 1, 0);
  for (std::size_t i = 1; i <= rows; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(cols + 1, kInf);
    std::vector<char> used(cols + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= cols; ++j) {
        if (used[j]) continue;
        const double c = a(i0, j);
        if (c != kInf) {
          const double cur = c - u[i0] - v[j];
          if (cur < minv[j]) {
            minv[j] = cur;
            way[j] = j0;
          }
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      if (delta == kInf) return std::nullopt;
      for (std::size_t j = 0; j <= cols; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> col_of(rows, 0);
  for (std::size_t j = 1; j <= cols; ++j) {
    if (p[j] != 0) col_of[p[j] - 1] = j - 1;
  }
  return col_of;
}

double count_spanning_trees(const UndirectedGraph& g) {
  const std::size_t n = g.num_vertices;
  if (n <= 1) return 1.0;
  std::vector<Vector> cols(n - 1, Vector(n - 1, 0.0));
  for (const auto& [u, v] : g.edges) {
    if (u > 0) cols[u - 1][u - 1] += 1.0;
    if (v > 0) cols[v - 1][v - 1] += 1.0;
    if (u > 0 && v > 0) {
      cols[u - 1][v - 1] -= 1.0;
      cols[v - 1][u - 1] -= 1.0;
    }
  }
  const double det = LuDecomp(cols).determinant();
  return std::max(0.0, std::round(det));
}

ActionSet ActionSet::m_sets(std::size_t d, std::size_t m) {
  if (d == 0 || m == 0 || m > d) throw Error(ErrorCode::kInvalidArgument, "m-sets need 1 <= m <= d");
  ActionSet s;
  s.kind_ = DomainKind::kMSets;
  s.dim_ = d;
  s.weight_ = m;
  return s;
}

ActionSet ActionSet::dag_paths(const Dag& g, bool equalize) {
  ActionSet s;
  s.kind_ = DomainKind::kDagPaths;
  if (equalize) {
    s.leveled_ = equalize_path_lengths(g);
    s.dag_ = s.leveled_->dag;
    s.weight_ = s.leveled_->path_length;
    s.fixed_weight_ = true;
  } else {
    s.dag_ = g;
    s.weight_ = g.max_path_length();
    s.fixed_weight_ = g.min_path_length() == s.weight_;
  }
  s.dim_ = s.dag_->num_edges();
  return s;
}

ActionSet ActionSet::spanning_trees(UndirectedGraph g) {
  validate_graph(g);
  if (g.num_vertices < 2 || g.edges.empty()) {
    throw Error(ErrorCode::kInfeasibleDomain, "spanning trees need at least one edge");
  }
  ActionSet s;
  s.kind_ = DomainKind::kSpanningTrees;
  s.dim_ = g.edges.size();
  s.weight_ = g.num_vertices - 1;
  s.graph_ = std::move(g);
  std::vector<double> zero(s.dim_, 0.0);
  (void)s.lmo(zero);  // connectivity check
  return s;
}

ActionSet ActionSet::k_forests(UndirectedGraph g, std::size_t k) {
  validate_graph(g);
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k-forests need k >= 1");
  ActionSet s;
  s.kind_ = DomainKind::kKForests;
  s.dim_ = g.edges.size();
  s.weight_ = k;
  s.graph_ = std::move(g);
  std::vector<double> zero(s.dim_, 0.0);
  (void)s.lmo(zero);
  return s;
}

ActionSet ActionSet::permutations(std::size_t n) {
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "permutations need n >= 1");
  ActionSet s;
  s.kind_ = DomainKind::kPermutations;
  s.rows_ = s.cols_ = n;
  s.dim_ = n * n;
  s.weight_ = n;
  return s;
}

ActionSet ActionSet::truncated_permutations(std::size_t k, std::size_t n) {
  if (k == 0 || k > n) throw Error(ErrorCode::kInvalidArgument, "truncated permutations need 1 <= k <= n");
  ActionSet s;
  s.kind_ = DomainKind::kTruncatedPermutations;
  s.rows_ = k;
  s.cols_ = n;
  s.dim_ = k * n;
  s.weight_ = k;
  return s;
}

std::string ActionSet::describe() const {
  std::ostringstream os;
  os << to_string(kind_) << "(d=" << dim_ << ", m=" << weight_;
  switch (kind_) {
    case DomainKind::kDagPaths:
      os << ", |V|=" << dag_->num_vertices();
      if (leveled_) os << ", padding_edges=" << leveled_->padding_edges;
      break;
    case DomainKind::kSpanningTrees:
    case DomainKind::kKForests:
      os << ", |V|=" << graph_->num_vertices;
      break;
    case DomainKind::kPermutations:
    case DomainKind::kTruncatedPermutations:
      os << ", shape=" << rows_ << "x" << cols_;
      break;
    default:
      break;
  }
  os << ")";
  return os.str();
}

const LeveledDag* ActionSet::leveled() const { return leveled_ ? &*leveled_ : nullptr; }
const Dag* ActionSet::dag() const { return dag_ ? &*dag_ : nullptr; }
const UndirectedGraph* ActionSet::graph() const { return graph_ ? &*graph_ : nullptr; }
std::pair<std::size_t, std::size_t> ActionSet::matrix_shape() const { return {rows_, cols_}; }

bool ActionSet::contains(const Action& a) const {
  if (a.dim() != dim_) return false;
  const std::size_t w = a.weight();
  switch (kind_) {
    case DomainKind::kMSets:
      return w == weight_;
    case DomainKind::kDagPaths: {
      std::size_t v = dag_->source();
      std::size_t steps = 0;
      while (v != dag_->sink()) {
        std::size_t next = dag_->num_vertices();
        for (std::size_t e : dag_->out_edges()[v]) {
          if (!a[e]) continue;
          if (next != dag_->num_vertices()) return false;
          next = dag_->edges()[e].second;
        }
        if (next == dag_->num_vertices()) return false;
        v = next;
        ++steps;
      }
      return steps == w;
    }
    case DomainKind::kSpanningTrees:
    case DomainKind::kKForests:
      return w == weight_ && acyclic_edges(*graph_, a);
    case DomainKind::kPermutations:
    case DomainKind::kTruncatedPermutations: {
      for (std::size_t i = 0; i < rows_; ++i) {
        std::size_t row = 0;
        for (std::size_t j = 0; j < cols_; ++j) row += a[i * cols_ + j];
        if (row != 1) return false;
      }
      for (std::size_t j = 0; j < cols_; ++j) {
        std::size_t col = 0;
        for (std::size_t i = 0; i < rows_; ++i) col += a[i * cols_ + j];
        if (col > 1 || (rows_ == cols_ && col != 1)) return false;
      }
      return true;
    }
  }
  return false;
}

Action ActionSet::lmo(std::span<const double> w) const {
  check_weights(w, dim_);
  switch (kind_) {
    case DomainKind::kMSets: {
      std::vector<std::size_t> order(dim_);
      std::iota(order.begin(), order.end(), 0);
      std::partial_sort(order.begin(), order.begin() + static_cast<long>(weight_), order.end(),
                        [&](std::size_t a, std::size_t b) {
                          if (w[a] != w[b]) return w[a] > w[b];
                          return a > b;
                        });
      Action out = Action::zeros(dim_);
      for (std::size_t i = 0; i < weight_; ++i) out.set(order[i], true);
      return out;
    }
    case DomainKind::kDagPaths: {
      const Dag& g = *dag_;
      struct Best {
        bool reachable = false;
        double value = 0.0;
        std::vector<std::size_t> edges;  // sorted
      };
      std::vector<Best> best(g.num_vertices());
      best[g.sink()].reachable = true;
      const auto& topo = g.topological_order();
      for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
        const std::size_t v = *it;
        if (v == g.sink()) continue;
        Best& b = best[v];
        for (std::size_t e : g.out_edges()[v]) {
          const Best& nb = best[g.edges()[e].second];
          if (!nb.reachable) continue;
          const double val = w[e] + nb.value;
          if (b.reachable && val < b.value) continue;
          std::vector<std::size_t> cand = nb.edges;
          cand.insert(std::upper_bound(cand.begin(), cand.end(), e), e);
          if (!b.reachable || val > b.value || lex_less_index_sets(cand, b.edges)) {
            b.reachable = true;
            b.value = val;
            b.edges = std::move(cand);
          }
        }
      }
      Action out = Action::zeros(dim_);
      for (std::size_t e : best[g.source()].edges) out.set(e, true);
      return out;
    }
    case DomainKind::kSpanningTrees:
    case DomainKind::kKForests:
      return kruskal(*graph_, w, weight_);
    case DomainKind::kPermutations:
    case DomainKind::kTruncatedPermutations: {
      constexpr double kInf = std::numeric_limits<double>::infinity();
      std::vector<double> cost(dim_);
      for (std::size_t i = 0; i < dim_; ++i) cost[i] = -w[i];
      auto value_of = [&](const std::vector<std::size_t>& cols) {
        double s = 0.0;
        for (std::size_t i = 0; i < rows_; ++i) s += w[i * cols_ + cols[i]];
        return s;
      };
      auto sol = solve_assignment(rows_, cols_, cost);
      if (!sol) throw Error(ErrorCode::kInfeasibleDomain, "no feasible assignment");
      const double opt = value_of(*sol);
      const double tol = 1e-12 * (1.0 + std::abs(opt));
      // Lexicographic refinement: forbid each used cell in order if an
      // optimal assignment survives without it.
      std::vector<std::size_t> current = *sol;
      for (std::size_t cell = 0; cell < dim_; ++cell) {
        const std::size_t i = cell / cols_, j = cell % cols_;
        if (current[i] != j) {
          cost[cell] = kInf;
          continue;
        }
        cost[cell] = kInf;
        auto alt = solve_assignment(rows_, cols_, cost);
        if (alt && value_of(*alt) >= opt - tol) {
          current = *alt;
        } else {
          cost[cell] = -w[cell];
        }
      }
      Action out = Action::zeros(dim_);
      for (std::size_t i = 0; i < rows_; ++i) out.set(i * cols_ + current[i], true);
      return out;
    }
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown domain kind");
}

std::optional<double> ActionSet::count() const {
  switch (kind_) {
    case DomainKind::kMSets:
      return binomial(dim_, weight_);
    case DomainKind::kDagPaths:
      return dag_->path_count();
    case DomainKind::kSpanningTrees:
      return count_spanning_trees(*graph_);
    case DomainKind::kKForests:
      return std::nullopt;
    case DomainKind::kPermutations:
    case DomainKind::kTruncatedPermutations:
      return std::round(std::exp(log_falling(cols_, rows_)));
  }
  return std::nullopt;
}

std::vector<Action> ActionSet::enumerate(std::size_t cap) const {
  if (auto c = count(); c && *c > static_cast<double>(cap)) {
    std::ostringstream os;
    os << describe() << " has " << *c << " actions, cap " << cap;
    throw Error(ErrorCode::kTooLarge, os.str());
  }
  std::vector<Action> out;
  switch (kind_) {
    case DomainKind::kMSets: {
      std::vector<std::uint8_t> bits(dim_, 0);
      std::fill(bits.end() - static_cast<long>(weight_), bits.end(), 1);
      do {
        out.emplace_back(bits);
      } while (std::next_permutation(bits.begin(), bits.end()));
      break;
    }
    case DomainKind::kDagPaths: {
      const Dag& g = *dag_;
      Action cur = Action::zeros(dim_);
      std::function<void(std::size_t)> rec = [&](std::size_t v) {
        if (v == g.sink()) {
          out.push_back(cur);
          return;
        }
        for (std::size_t e : g.out_edges()[v]) {
          cur.set(e, true);
          rec(g.edges()[e].second);
          cur.set(e, false);
        }
      };
      rec(g.source());
      break;
    }
    case DomainKind::kSpanningTrees:
    case DomainKind::kKForests:
      enumerate_forests(*graph_, weight_, cap, out);
      break;
    case DomainKind::kPermutations:
    case DomainKind::kTruncatedPermutations: {
      std::vector<std::size_t> cols(cols_);
      std::iota(cols.begin(), cols.end(), 0);
      std::vector<char> used(cols_, 0);
      Action cur = Action::zeros(dim_);
      std::function<void(std::size_t)> rec = [&](std::size_t i) {
        if (i == rows_) {
          out.push_back(cur);
          return;
        }
        for (std::size_t j = 0; j < cols_; ++j) {
          if (used[j]) continue;
          used[j] = 1;
          cur.set(i * cols_ + j, true);
          rec(i + 1);
          cur.set(i * cols_ + j, false);
          used[j] = 0;
        }
      };
      rec(0);
      break;
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Vector ActionSet::uniform_marginal() const {
  switch (kind_) {
    case DomainKind::kMSets:
      return Vector(dim_, static_cast<double>(weight_) / static_cast<double>(dim_));
    case DomainKind::kPermutations:
    case DomainKind::kTruncatedPermutations:
      return Vector(dim_, 1.0 / static_cast<double>(cols_));
    case DomainKind::kDagPaths: {
      const auto from = dag_->paths_from_source();
      const auto to = dag_->paths_to_sink();
      const double total = to[dag_->source()];
      Vector out(dim_);
      for (std::size_t e = 0; e < dim_; ++e) {
        const auto [u, v] = dag_->edges()[e];
        out[e] = from[u] * to[v] / total;
      }
      return out;
    }
    default: {
      const auto all = enumerate(kUniformEnumerationCap);
      Vector out(dim_, 0.0);
      for (const auto& a : all) {
        for (std::size_t i : a.ones()) out[i] += 1.0;
      }
      for (double& x : out) x /= static_cast<double>(all.size());
      return out;
    }
  }
}

SymMatrix ActionSet::uniform_co_occurrence() const {
  SymMatrix sigma(dim_);
  switch (kind_) {
    case DomainKind::kMSets: {
      const double d = static_cast<double>(dim_), m = static_cast<double>(weight_);
      const double off = dim_ > 1 ? m * (m - 1.0) / (d * (d - 1.0)) : 0.0;
      for (std::size_t i = 0; i < dim_; ++i) {
        for (std::size_t j = i; j < dim_; ++j) sigma.set(i, j, i == j ? m / d : off);
      }
      return sigma;
    }
    case DomainKind::kPermutations:
    case DomainKind::kTruncatedPermutations: {
      const double n = static_cast<double>(cols_);
      const double off = cols_ > 1 ? 1.0 / (n * (n - 1.0)) : 0.0;
      for (std::size_t a = 0; a < dim_; ++a) {
        for (std::size_t b = a; b < dim_; ++b) {
          const std::size_t ia = a / cols_, ja = a % cols_, ib = b / cols_, jb = b % cols_;
          double v = 0.0;
          if (a == b) {
            v = 1.0 / n;
          } else if (ia != ib && ja != jb) {
            v = off;
          }
          sigma.set(a, b, v);
        }
      }
      return sigma;
    }
    case DomainKind::kDagPaths: {
      const Dag& g = *dag_;
      const std::size_t nv = g.num_vertices();
      const auto from = g.paths_from_source();
      const auto to = g.paths_to_sink();
      const double total = to[g.source()];
      // between[x][y]: number of x-y paths.
      std::vector<std::vector<double>> between(nv, std::vector<double>(nv, 0.0));
      const auto& topo = g.topological_order();
      for (std::size_t x = 0; x < nv; ++x) {
        auto& row = between[x];
        row[x] = 1.0;
        for (std::size_t v : topo) {
          if (row[v] == 0.0) continue;
          for (std::size_t e : g.out_edges()[v]) row[g.edges()[e].second] += row[v];
        }
      }
      for (std::size_t e = 0; e < dim_; ++e) {
        const auto [a, b] = g.edges()[e];
        sigma.set(e, e, from[a] * to[b] / total);
        for (std::size_t f = e + 1; f < dim_; ++f) {
          const auto [c, d] = g.edges()[f];
          const double n = from[a] * between[b][c] * to[d] + from[c] * between[d][a] * to[b];
          sigma.set(e, f, n / total);
        }
      }
      return sigma;
    }
    default: {
      const auto all = enumerate(kUniformEnumerationCap);
      const double w = 1.0 / static_cast<double>(all.size());
      for (const auto& a : all) sigma.add_outer(a, w);
      return sigma;
    }
  }
}

Action ActionSet::sample_uniform(CounterRng& rng) const {
  Action out = Action::zeros(dim_);
  switch (kind_) {
    case DomainKind::kMSets: {
      std::vector<std::size_t> idx(dim_);
      std::iota(idx.begin(), idx.end(), 0);
      for (std::size_t i = 0; i < weight_; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.next_below(dim_ - i));
        std::swap(idx[i], idx[j]);
        out.set(idx[i], true);
      }
      return out;
    }
    case DomainKind::kPermutations:
    case DomainKind::kTruncatedPermutations: {
      std::vector<std::size_t> idx(cols_);
      std::iota(idx.begin(), idx.end(), 0);
      for (std::size_t i = 0; i < rows_; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.next_below(cols_ - i));
        std::swap(idx[i], idx[j]);
        out.set(i * cols_ + idx[i], true);
      }
      return out;
    }
    case DomainKind::kDagPaths: {
      const Dag& g = *dag_;
      const auto to = g.paths_to_sink();
      std::size_t v = g.source();
      while (v != g.sink()) {
        double u = rng.next_double() * to[v];
        std::size_t chosen = g.out_edges()[v].back();
        for (std::size_t e : g.out_edges()[v]) {
          u -= to[g.edges()[e].second];
          if (u < 0.0) {
            chosen = e;
            break;
          }
        }
        out.set(chosen, true);
        v = g.edges()[chosen].second;
      }
      return out;
    }
    default: {
      const auto all = enumerate(kUniformEnumerationCap);
      return all[rng.next_below(all.size())];
    }
  }
}

}  // namespace swapcomb
