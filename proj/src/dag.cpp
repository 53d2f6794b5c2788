#include <algorithm>
#include <limits>
#include <sstream>

#include "swapcomb/domains.hpp"
#include "swapcomb/error.hpp"

namespace swapcomb {

namespace {

std::vector<std::size_t> topo_sort(std::size_t n, const std::vector<Edge>& edges) {
  std::vector<std::size_t> indeg(n, 0);
  std::vector<std::vector<std::size_t>> adj(n);
  for (const auto& [u, v] : edges) {
    adj[u].push_back(v);
    ++indeg[v];
  }
  std::vector<std::size_t> order;
  order.reserve(n);
  std::vector<std::size_t> stack;
  for (std::size_t v = n; v-- > 0;) {
    if (indeg[v] == 0) stack.push_back(v);
  }
  while (!stack.empty()) {
    const std::size_t v = stack.back();
    stack.pop_back();
    order.push_back(v);
    for (std::size_t w : adj[v]) {
      if (--indeg[w] == 0) stack.push_back(w);
    }
  }
  if (order.size() != n) {
    throw Error(ErrorCode::kInvalidArgument, "graph contains a directed cycle");
  }
  return order;
}

}  // namespace

Dag::Dag(std::size_t num_vertices, std::vector<Edge> edges, std::size_t source, std::size_t sink)
    : num_vertices_(num_vertices), source_(source), sink_(sink) {
  if (source >= num_vertices || sink >= num_vertices || source == sink) {
    throw Error(ErrorCode::kInvalidArgument, "invalid source/sink");
  }
  for (const auto& [u, v] : edges) {
    if (u >= num_vertices || v >= num_vertices || u == v) {
      std::ostringstream os;
      os << "invalid edge (" << u << ", " << v << ")";
      throw Error(ErrorCode::kInvalidArgument, os.str());
    }
  }
  const auto order = topo_sort(num_vertices, edges);

  // Forward reachability from the source, backward from the sink.
  std::vector<char> from_s(num_vertices, 0), to_t(num_vertices, 0);
  from_s[source] = 1;
  to_t[sink] = 1;
  std::vector<std::vector<std::size_t>> out_all(num_vertices), in_all(num_vertices);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    out_all[edges[e].first].push_back(e);
    in_all[edges[e].second].push_back(e);
  }
  for (std::size_t v : order) {
    if (!from_s[v]) continue;
    for (std::size_t e : out_all[v]) from_s[edges[e].second] = 1;
  }
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if (!to_t[*it]) continue;
    for (std::size_t e : in_all[*it]) to_t[edges[e].first] = 1;
  }

  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto [u, v] = edges[e];
    if (from_s[u] && to_t[v]) {
      edges_.push_back(edges[e]);
      kept_edges_.push_back(e);
    }
  }
  if (edges_.empty()) {
    throw Error(ErrorCode::kInfeasibleDomain, "no source-sink path");
  }
  out_.assign(num_vertices, {});
  in_.assign(num_vertices, {});
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    out_[edges_[e].first].push_back(e);
    in_[edges_[e].second].push_back(e);
  }
  topo_ = order;
}

std::size_t Dag::max_path_length() const {
  std::vector<long> best(num_vertices_, -1);
  best[source_] = 0;
  for (std::size_t v : topo_) {
    if (best[v] < 0) continue;
    for (std::size_t e : out_[v]) {
      const std::size_t w = edges_[e].second;
      best[w] = std::max(best[w], best[v] + 1);
    }
  }
  return static_cast<std::size_t>(best[sink_]);
}

std::size_t Dag::min_path_length() const {
  constexpr long kInf = std::numeric_limits<long>::max();
  std::vector<long> best(num_vertices_, kInf);
  best[source_] = 0;
  for (std::size_t v : topo_) {
    if (best[v] == kInf) continue;
    for (std::size_t e : out_[v]) {
      const std::size_t w = edges_[e].second;
      best[w] = std::min(best[w], best[v] + 1);
    }
  }
  return static_cast<std::size_t>(best[sink_]);
}

std::vector<double> Dag::paths_from_source() const {
  std::vector<double> cnt(num_vertices_, 0.0);
  cnt[source_] = 1.0;
  for (std::size_t v : topo_) {
    for (std::size_t e : out_[v]) cnt[edges_[e].second] += cnt[v];
  }
  return cnt;
}

std::vector<double> Dag::paths_to_sink() const {
  std::vector<double> cnt(num_vertices_, 0.0);
  cnt[sink_] = 1.0;
  for (auto it = topo_.rbegin(); it != topo_.rend(); ++it) {
    for (std::size_t e : out_[*it]) cnt[*it] += cnt[edges_[e].second];
  }
  return cnt;
}

double Dag::path_count() const { return paths_from_source()[sink_]; }

Dag read_dag(std::istream& in) {
  std::size_t v = 0, e = 0, s = 0, t = 0;
  if (!(in >> v >> e >> s >> t)) {
    throw Error(ErrorCode::kConfig, "DAG file: expected header 'V E s t'");
  }
  std::vector<Edge> edges;
  edges.reserve(e);
  for (std::size_t i = 0; i < e; ++i) {
    std::size_t a = 0, b = 0;
    if (!(in >> a >> b)) {
      std::ostringstream os;
      os << "DAG file: expected edge line " << (i + 2);
      throw Error(ErrorCode::kConfig, os.str());
    }
    edges.emplace_back(a, b);
  }
  return Dag(v, std::move(edges), s, t);
}

Vector LeveledDag::lift(std::span<const double> original_reward) const {
  Vector out(dag.num_edges(), 0.0);
  for (std::size_t i = 0; i < coordinate_of.size(); ++i) {
    out[coordinate_of[i]] = original_reward[i];
  }
  return out;
}

Action LeveledDag::project(const Action& padded) const {
  Action out = Action::zeros(coordinate_of.size());
  for (std::size_t i = 0; i < coordinate_of.size(); ++i) {
    out.set(i, padded[coordinate_of[i]] != 0);
  }
  return out;
}

LeveledDag equalize_path_lengths(const Dag& g) {
  const std::size_t n = g.num_vertices();
  const auto& edges = g.edges();

  // height[v]: longest path from v to the sink.
  std::vector<long> height(n, -1);
  height[g.sink()] = 0;
  const auto& topo = g.topological_order();
  for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
    for (std::size_t e : g.out_edges()[*it]) {
      const long h = height[edges[e].second];
      if (h >= 0) height[*it] = std::max(height[*it], h + 1);
    }
  }
  const auto path_length = static_cast<std::size_t>(height[g.source()]);

  // Every edge drops height by at least one; an edge that drops by `gap`
  // enters a shared ladder of gap - 1 padding vertices hanging above its head.
  std::vector<std::size_t> ladder_len(n, 0);
  for (const auto& [u, v] : edges) {
    const auto gap = static_cast<std::size_t>(height[u] - height[v]);
    ladder_len[v] = std::max(ladder_len[v], gap - 1);
  }
  std::vector<std::vector<std::size_t>> ladder(n);  // ladder[v][j-1] sits at height(v) + j
  std::size_t next_vertex = n;
  std::vector<Edge> new_edges(edges.begin(), edges.end());
  std::vector<Edge> padding;
  for (std::size_t v = 0; v < n; ++v) {
    std::size_t below = v;
    for (std::size_t j = 0; j < ladder_len[v]; ++j) {
      const std::size_t id = next_vertex++;
      ladder[v].push_back(id);
      padding.emplace_back(id, below);
      below = id;
    }
  }
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto [u, v] = edges[e];
    const auto gap = static_cast<std::size_t>(height[u] - height[v]);
    if (gap > 1) new_edges[e] = {u, ladder[v][gap - 2]};
  }
  const std::size_t num_padding_edges = padding.size();
  new_edges.insert(new_edges.end(), padding.begin(), padding.end());

  LeveledDag out{Dag(next_vertex, std::move(new_edges), g.source(), g.sink()), {}, {}, path_length,
                 next_vertex - n, num_padding_edges};
  out.original_edge.assign(out.dag.num_edges(), -1);
  for (std::size_t e = 0; e < edges.size(); ++e) out.original_edge[e] = static_cast<long>(e);
  out.coordinate_of.resize(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) out.coordinate_of[e] = e;
  return out;
}

Dag build_shortcut_dag(std::size_t n) {
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "shortcut DAG needs n >= 1");
  constexpr std::size_t kS = 0, kD = 1;
  auto a = [](std::size_t i) { return 2 * i; };
  auto b = [](std::size_t i) { return 2 * i + 1; };
  std::vector<Edge> edges;
  edges.reserve(4 * n + 1);
  edges.emplace_back(kS, kD);
  edges.emplace_back(kS, a(1));
  edges.emplace_back(kS, b(1));
  for (std::size_t i = 1; i < n; ++i) {
    edges.emplace_back(a(i), a(i + 1));
    edges.emplace_back(a(i), b(i + 1));
    edges.emplace_back(b(i), a(i + 1));
    edges.emplace_back(b(i), b(i + 1));
  }
  edges.emplace_back(a(n), kD);
  edges.emplace_back(b(n), kD);
  return Dag(2 * n + 2, std::move(edges), kS, kD);
}

}  // namespace swapcomb
