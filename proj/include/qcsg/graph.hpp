#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "qcsg/geometry.hpp"

namespace qcsg {

/// Undirected simple graph over primitive ids. Vertex order is insertion order.
class IntersectionGraph {
 public:
  IntersectionGraph() = default;
  explicit IntersectionGraph(std::vector<std::string> vertices);

  /// Throws Error(Structural) on self-loops and unknown ids.
  void add_edge(const std::string& a, const std::string& b);
  void add_edge(std::size_t a, std::size_t b);

  std::size_t size() const { return vertices_.size(); }
  const std::vector<std::string>& vertices() const { return vertices_; }
  std::size_t index_of(const std::string& id) const;

  bool adjacent(std::size_t a, std::size_t b) const { return adjacency_[a][b] != 0; }
  /// Ascending vertex indices.
  const std::vector<std::size_t>& neighbors(std::size_t v) const { return neighbors_[v]; }
  /// Pairs (a, b) with a < b in vertex order, sorted.
  std::vector<std::pair<std::size_t, std::size_t>> edges() const;
  std::size_t edge_count() const;

  bool is_clique(std::span<const std::size_t> members) const;

 private:
  std::vector<std::string> vertices_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::vector<char>> adjacency_;
  std::vector<std::vector<std::size_t>> neighbors_;
};

/// Clique members as primitive ids, sorted lexicographically.
struct Clique {
  std::vector<std::string> members;

  std::size_t size() const { return members.size(); }
  bool contains(const std::string& id) const;
  bool operator==(const Clique&) const = default;
};

/// Size descending, then lexicographic member ids.
bool canonical_less(const Clique& a, const Clique& b);
void sort_canonical(std::vector<Clique>& cliques);

/// Vertex indices of `clique` in `graph`, ascending.
std::vector<std::size_t> member_indices(const IntersectionGraph& graph, const Clique& clique);
Clique make_clique(const IntersectionGraph& graph, std::span<const std::size_t> members);

struct GraphSampling {
  std::size_t count = 4096;
  std::uint64_t seed = 0;
};

/// Edge (a, b) iff a sample drawn inside one primitive lies strictly inside the
/// other. Pairs with disjoint bounding boxes are skipped.
IntersectionGraph build_intersection_graph(const PrimitiveSet& primitives,
                                           const GraphSampling& sampling);

/// Bron-Kerbosch with Tomita pivoting. Output in canonical order.
std::vector<Clique> maximal_cliques_bk(const IntersectionGraph& graph);

}  // namespace qcsg
