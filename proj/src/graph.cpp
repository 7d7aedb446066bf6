#include "qcsg/graph.hpp"

#include <algorithm>
#include <iterator>

#include "qcsg/error.hpp"
#include "qcsg/random.hpp"

namespace qcsg {

IntersectionGraph::IntersectionGraph(std::vector<std::string> vertices)
    : vertices_(std::move(vertices)) {
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    if (!index_.emplace(vertices_[i], i).second) {
      throw Error(ErrorKind::Structural, "duplicate vertex '" + vertices_[i] + "'");
    }
  }
  adjacency_.assign(vertices_.size(), std::vector<char>(vertices_.size(), 0));
  neighbors_.resize(vertices_.size());
}

std::size_t IntersectionGraph::index_of(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw Error(ErrorKind::Structural, "unknown vertex '" + id + "'");
  return it->second;
}

void IntersectionGraph::add_edge(const std::string& a, const std::string& b) {
  add_edge(index_of(a), index_of(b));
}

void IntersectionGraph::add_edge(std::size_t a, std::size_t b) {
  if (a >= size() || b >= size()) throw Error(ErrorKind::Structural, "edge endpoint out of range");
  if (a == b) throw Error(ErrorKind::Structural, "self-loop on '" + vertices_[a] + "'");
  if (adjacency_[a][b]) return;
  adjacency_[a][b] = adjacency_[b][a] = 1;
  auto insert_sorted = [](std::vector<std::size_t>& v, std::size_t x) {
    v.insert(std::lower_bound(v.begin(), v.end(), x), x);
  };
  insert_sorted(neighbors_[a], b);
  insert_sorted(neighbors_[b], a);
}

std::vector<std::pair<std::size_t, std::size_t>> IntersectionGraph::edges() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t a = 0; a < size(); ++a) {
    for (std::size_t b : neighbors_[a]) {
      if (a < b) out.emplace_back(a, b);
    }
  }
  return out;
}

std::size_t IntersectionGraph::edge_count() const {
  std::size_t twice = 0;
  for (const auto& n : neighbors_) twice += n.size();
  return twice / 2;
}

bool IntersectionGraph::is_clique(std::span<const std::size_t> members) const {
  for (std::size_t i = 0; i < members.size(); ++i) {
    for (std::size_t j = i + 1; j < members.size(); ++j) {
      if (!adjacent(members[i], members[j])) return false;
    }
  }
  return true;
}

bool Clique::contains(const std::string& id) const {
  return std::binary_search(members.begin(), members.end(), id);
}

bool canonical_less(const Clique& a, const Clique& b) {
  if (a.size() != b.size()) return a.size() > b.size();
  return a.members < b.members;
}

void sort_canonical(std::vector<Clique>& cliques) {
  std::sort(cliques.begin(), cliques.end(), canonical_less);
}

std::vector<std::size_t> member_indices(const IntersectionGraph& graph, const Clique& clique) {
  std::vector<std::size_t> out;
  out.reserve(clique.size());
  for (const auto& id : clique.members) out.push_back(graph.index_of(id));
  std::sort(out.begin(), out.end());
  return out;
}

Clique make_clique(const IntersectionGraph& graph, std::span<const std::size_t> members) {
  Clique c;
  for (std::size_t v : members) c.members.push_back(graph.vertices()[v]);
  std::sort(c.members.begin(), c.members.end());
  return c;
}

IntersectionGraph build_intersection_graph(const PrimitiveSet& primitives,
                                           const GraphSampling& sampling) {
  IntersectionGraph graph(primitives.ids());
  const std::size_t n = primitives.size();

  std::vector<std::vector<Vec3>> samples(n);
  for (std::size_t i = 0; i < n; ++i) {
    samples[i] = sample_region(std::span(&primitives[i], 1), {}, sampling.count,
                               derive_seed(sampling.seed, i));
  }

  auto any_inside = [&](std::size_t from, std::size_t into) {
    return std::any_of(samples[from].begin(), samples[from].end(), [&](const Vec3& x) {
      return primitives[into].signed_distance(x) < 0.0;
    });
  };

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!primitives[i].bounds().overlaps(primitives[j].bounds())) continue;
      if (any_inside(i, j) || any_inside(j, i)) graph.add_edge(i, j);
    }
  }
  return graph;
}

namespace {

class BronKerbosch {
 public:
  explicit BronKerbosch(const IntersectionGraph& g) : g_(g) {}

  void run() {
    std::vector<std::size_t> r, p(g_.size()), x;
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = i;
    expand(r, p, x);
  }

  std::vector<Clique> found;

 private:
  std::vector<std::size_t> restrict_to_neighbors(const std::vector<std::size_t>& s,
                                                 std::size_t v) const {
    std::vector<std::size_t> out;
    const auto& nb = g_.neighbors(v);
    std::set_intersection(s.begin(), s.end(), nb.begin(), nb.end(), std::back_inserter(out));
    return out;
  }

  void expand(std::vector<std::size_t>& r, std::vector<std::size_t> p,
              std::vector<std::size_t> x) {
    if (p.empty()) {
      if (x.empty()) found.push_back(make_clique(g_, r));
      return;
    }
    // Pivot maximizing |P n N(u)| over P u X.
    std::size_t pivot = p.front();
    std::size_t best = 0;
    bool first = true;
    for (const auto* set : {&p, &x}) {
      for (std::size_t u : *set) {
        const std::size_t c = restrict_to_neighbors(p, u).size();
        if (first || c > best) {
          pivot = u;
          best = c;
          first = false;
        }
      }
    }
    std::vector<std::size_t> branch;
    const auto& pivot_nb = g_.neighbors(pivot);
    std::set_difference(p.begin(), p.end(), pivot_nb.begin(), pivot_nb.end(),
                        std::back_inserter(branch));
    for (std::size_t v : branch) {
      r.push_back(v);
      std::sort(r.begin(), r.end());
      expand(r, restrict_to_neighbors(p, v), restrict_to_neighbors(x, v));
      r.erase(std::find(r.begin(), r.end(), v));
      p.erase(std::find(p.begin(), p.end(), v));
      x.insert(std::lower_bound(x.begin(), x.end(), v), v);
    }
  }

  const IntersectionGraph& g_;
};

}  // namespace

std::vector<Clique> maximal_cliques_bk(const IntersectionGraph& graph) {
  if (graph.size() == 0) return {};
  BronKerbosch bk(graph);
  bk.run();
  sort_canonical(bk.found);
  return bk.found;
}

}  // namespace qcsg
