#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "swapcomb/action.hpp"
#include "swapcomb/linalg.hpp"
#include "swapcomb/rng.hpp"

namespace swapcomb {

using Edge = std::pair<std::size_t, std::size_t>;

// Directed acyclic graph with a designated source and sink. Construction
// validates acyclicity and prunes edges that lie on no source-sink path;
// kept_edges[i] is the index in the caller's edge list of edge i.
class Dag {
 public:
  Dag(std::size_t num_vertices, std::vector<Edge> edges, std::size_t source, std::size_t sink);

  std::size_t num_vertices() const { return num_vertices_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::size_t num_edges() const { return edges_.size(); }
  std::size_t source() const { return source_; }
  std::size_t sink() const { return sink_; }
  const std::vector<std::size_t>& kept_edges() const { return kept_edges_; }
  const std::vector<std::size_t>& topological_order() const { return topo_; }
  const std::vector<std::vector<std::size_t>>& out_edges() const { return out_; }
  const std::vector<std::vector<std::size_t>>& in_edges() const { return in_; }

  // Longest / shortest source-sink path length in edges.
  std::size_t max_path_length() const;
  std::size_t min_path_length() const;
  // Number of source-sink paths (as a double; may be astronomically large).
  double path_count() const;
  // paths from source to v, and from v to sink.
  std::vector<double> paths_from_source() const;
  std::vector<double> paths_to_sink() const;

 private:
  std::size_t num_vertices_;
  std::vector<Edge> edges_;
  std::size_t source_;
  std::size_t sink_;
  std::vector<std::size_t> kept_edges_;
  std::vector<std::size_t> topo_;
  std::vector<std::vector<std::size_t>> out_;
  std::vector<std::vector<std::size_t>> in_;
};

// Plain text: "V E s t" then E lines "u v", 0-indexed.
Dag read_dag(std::istream& in);

// Result of padding a DAG so every source-sink path has the same length K.
// original_edge[e] is the index of the source edge carried by e, or -1 for a
// zero-reward padding edge; coordinate_of[i] maps source edge i to its
// coordinate in the padded graph.
struct LeveledDag {
  Dag dag;
  std::vector<long> original_edge;
  std::vector<std::size_t> coordinate_of;
  std::size_t path_length = 0;
  std::size_t padding_vertices = 0;
  std::size_t padding_edges = 0;

  // Embed a reward vector over the source edges (padding gets 0).
  Vector lift(std::span<const double> original_reward) const;
  // Restrict an action over padded coordinates to the source edges.
  Action project(const Action& padded) const;
};

LeveledDag equalize_path_lengths(const Dag& g);

// Vertices S=0, D=1, A_i=2i, B_i=2i+1 (i = 1..n). Edge 0 is the shortcut
// (S, D); then (S,A_1), (S,B_1), the four edges between layers i and i+1,
// and finally (A_n, D), (B_n, D).
Dag build_shortcut_dag(std::size_t n);

struct UndirectedGraph {
  std::size_t num_vertices = 0;
  std::vector<Edge> edges;
};

enum class DomainKind {
  kMSets,
  kDagPaths,
  kSpanningTrees,
  kKForests,
  kPermutations,
  kTruncatedPermutations,
};

const char* to_string(DomainKind kind);

// A combinatorial action set A in {0,1}^d. Immutable after construction; all
// oracle calls are const and safe to call concurrently.
class ActionSet {
 public:
  static ActionSet m_sets(std::size_t d, std::size_t m);
  // With equalize = true the DAG is padded so all paths share one length.
  static ActionSet dag_paths(const Dag& g, bool equalize = true);
  static ActionSet spanning_trees(UndirectedGraph g);
  static ActionSet k_forests(UndirectedGraph g, std::size_t k);
  static ActionSet permutations(std::size_t n);
  // k x n binary matrices with one 1 per row and at most one per column.
  static ActionSet truncated_permutations(std::size_t k, std::size_t n);

  DomainKind kind() const { return kind_; }
  std::size_t dim() const { return dim_; }
  // m: the common action weight, or the maximum weight for variable domains.
  std::size_t weight() const { return weight_; }
  bool fixed_weight() const { return fixed_weight_; }
  std::string describe() const;

  bool contains(const Action& a) const;

  // argmax_{M in A} w . M, ties broken toward the lexicographically smallest
  // bit vector. Throws InfeasibleDomain when A is empty.
  Action lmo(std::span<const double> w) const;

  // |A| from a counting formula (binomial, factorial, path DP, Kirchhoff);
  // nullopt for k-forests, which have no closed form here.
  std::optional<double> count() const;
  // All actions in lexicographic order; TooLarge when |A| > cap.
  std::vector<Action> enumerate(std::size_t cap) const;

  // E_{M ~ U(A)}[M] and E_{M ~ U(A)}[M M^T]; closed forms or path counting
  // where available, enumeration (capped at 10^6) otherwise.
  Vector uniform_marginal() const;
  SymMatrix uniform_co_occurrence() const;
  Action sample_uniform(CounterRng& rng) const;

  // Kind-specific views.
  const LeveledDag* leveled() const;
  const Dag* dag() const;  // the graph whose edges are the coordinates
  const UndirectedGraph* graph() const;
  // (rows, cols) for permutation kinds.
  std::pair<std::size_t, std::size_t> matrix_shape() const;

 private:
  ActionSet() = default;

  DomainKind kind_ = DomainKind::kMSets;
  std::size_t dim_ = 0;
  std::size_t weight_ = 0;
  bool fixed_weight_ = true;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::optional<Dag> dag_;
  std::optional<LeveledDag> leveled_;
  std::optional<UndirectedGraph> graph_;
};

// Min-cost assignment of rows to distinct columns (rows <= cols). Entries may
// be +infinity for forbidden cells. Returns the column of each row, or
// nullopt if no finite assignment exists.
std::optional<std::vector<std::size_t>> solve_assignment(std::size_t rows, std::size_t cols,
                                                          std::span<const double> cost);

// Number of spanning trees via the matrix-tree theorem.
double count_spanning_trees(const UndirectedGraph& g);

// Binary vector comparison on sorted index sets: true iff indicator(a) is
// lexicographically smaller than indicator(b).
bool lex_less_index_sets(std::span<const std::size_t> a, std::span<const std::size_t> b);

}  // namespace swapcomb
