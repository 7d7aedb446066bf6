#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "qcsg/error.hpp"
#include "qcsg/io.hpp"
#include "qcsg/products.hpp"

using namespace qcsg;

namespace {

std::set<std::string> names(const ProductTable& t, bool inside_only) {
  std::set<std::string> out;
  for (std::size_t i = 0; i < t.n_f(); ++i) {
    if (inside_only && !t.in_universe(i)) continue;
    std::string s;
    for (const auto& id : t.positive_ids(i)) s += id;
    out.insert(s);
  }
  return out;
}

// Non-empty cliques of the graph, counted by subset scan.
std::size_t clique_count(const IntersectionGraph& g) {
  std::size_t count = 0;
  for (std::uint32_t mask = 1; mask < (1u << g.size()); ++mask) {
    std::vector<std::size_t> members;
    for (std::size_t v = 0; v < g.size(); ++v) {
      if (mask >> v & 1) members.push_back(v);
    }
    count += g.is_clique(members);
  }
  return count;
}

const std::set<std::string> kAllProducts{"A",  "B",  "C",  "D",  "E",  "F",   "AB", "BC",
                                         "BD", "BE", "CD", "DE", "EF", "BCD", "BDE"};
const std::set<std::string> kInside{"A", "B", "E", "AB", "BC", "BE", "CD", "BCD"};

}  // namespace

TEST_CASE("abstract fixture table") {
  const auto inst = io::abstract_from_json(io::load_json(QCSG_DATA_DIR "/six_primitives_abstract.json"));
  const ProductTable& t = inst.table;
  CHECK(t.n_f() == 15);
  CHECK(t.universe.size() == 8);
  CHECK(names(t, false) == kAllProducts);
  CHECK(names(t, true) == kInside);
  CHECK(t.n_f() == clique_count(inst.graph));

  // Ordered by size, then indices.
  for (std::size_t i = 1; i < t.n_f(); ++i) {
    const auto& a = t.products[i - 1].positives;
    const auto& b = t.products[i].positives;
    CHECK((a.size() < b.size() || (a.size() == b.size() && a < b)));
  }
  CHECK(t.name(t.n_f() - 1) == "{B,D,E}");
}

TEST_CASE("geometric fixture reproduces the abstract table") {
  const PrimitiveSet set = io::primitives_from_json(io::load_json(QCSG_DATA_DIR "/six_primitives.json"));
  const CsgTree target = io::tree_from_json(io::load_json(QCSG_DATA_DIR "/six_primitives_target.json"));
  const auto oracle = SolidOracle::ground_truth(target, set);
  const IntersectionGraph g = build_intersection_graph(set, {4096, 1});
  const ProductTable t = enumerate_products(set, g, oracle, {2048, 2, 0.95, 0.05});
  CHECK(names(t, false) == kAllProducts);
  CHECK(names(t, true) == kInside);
  CHECK(t.warnings.empty());
  for (const auto& p : t.products) {
    CHECK_FALSE(p.samples.empty());
    CHECK(g.is_clique(p.positives));
    if (p.label == ProductLabel::Inside) CHECK(p.inside_fraction >= 0.95);
    if (p.label == ProductLabel::Outside) CHECK(p.inside_fraction <= 0.05);
    // Witnesses lie in the product region.
    for (const auto& x : p.samples) {
      for (std::size_t v = 0; v < set.size(); ++v) {
        CHECK((set[v].signed_distance(x) < 0) == p.contains(v));
      }
    }
  }
}

TEST_CASE("mixed products are reported and treated as outside") {
  PrimitiveSet set;
  set.add(Primitive::sphere("A", {0, 0, 0}, 1.0));
  PrimitiveSet truth_set = set;
  truth_set.add(Primitive::box("H", {1, 0, 0}, {1, 2, 2}));
  const auto target = CsgTree::intersect({CsgTree::leaf("A"), CsgTree::complement(CsgTree::leaf("H"))});
  const auto oracle = SolidOracle::ground_truth(target, truth_set);
  IntersectionGraph g({"A"});
  const ProductTable t = enumerate_products(set, g, oracle, {1000, 3, 0.95, 0.05});
  REQUIRE(t.n_f() == 1);
  CHECK(t.products[0].label == ProductLabel::Mixed);
  CHECK(t.products[0].inside_fraction == doctest::Approx(0.5).epsilon(0.1));
  CHECK(t.universe.empty());
  CHECK(t.warnings.size() == 1);
}

TEST_CASE("threshold validation") {
  PrimitiveSet set;
  set.add(Primitive::sphere("A", {0, 0, 0}, 1.0));
  const auto oracle = SolidOracle::ground_truth(CsgTree::leaf("A"), set);
  IntersectionGraph g({"A"});
  CHECK_THROWS_AS(enumerate_products(set, g, oracle, {100, 1, 0.4, 0.6}), Error);
  CHECK_THROWS_AS(enumerate_products(set, IntersectionGraph({"B"}), oracle, {100, 1, 0.95, 0.05}), Error);
}

TEST_CASE("abstract table validation") {
  IntersectionGraph g({"A", "B", "C"});
  g.add_edge("A", "B");
  const std::vector<AbstractProduct> not_clique{{{"A", "C"}, true}};
  CHECK_THROWS_AS(make_abstract_table(g, not_clique), Error);
  const std::vector<AbstractProduct> dup{{{"A"}, true}, {{"A"}, false}};
  CHECK_THROWS_AS(make_abstract_table(g, dup), Error);
  const std::vector<AbstractProduct> empty{{{}, true}};
  CHECK_THROWS_AS(make_abstract_table(g, empty), Error);
}

TEST_CASE("candidate bounds") {
  const auto inst = io::abstract_from_json(io::load_json(QCSG_DATA_DIR "/six_primitives_abstract.json"));
  const std::vector<Clique> q = maximal_cliques_bk(inst.graph);
  const CandidateBounds b = candidate_bounds(inst.table, q);
  CHECK(b.global.value == 32767);
  CHECK_FALSE(b.global.saturated);

  // Independent count of products inside each clique.
  std::uint64_t expected = 0;
  REQUIRE(b.per_clique_nf.size() == q.size());
  for (std::size_t j = 0; j < q.size(); ++j) {
    std::size_t nf = 0;
    for (std::size_t i = 0; i < inst.table.n_f(); ++i) {
      const auto ids = inst.table.positive_ids(i);
      nf += std::all_of(ids.begin(), ids.end(), [&](const std::string& id) { return q[j].contains(id); });
    }
    CHECK(b.per_clique_nf[j] == nf);
    expected += (std::uint64_t{1} << nf) - 1;
  }
  REQUIRE(b.partitioned);
  CHECK(b.partitioned->value == expected);
  CHECK(expected == 268);
  CHECK(b.partitioned->value < b.global.value);
  CHECK_FALSE(candidate_bounds(inst.table).partitioned);
}

TEST_CASE("mersenne bound saturation") {
  CHECK(mersenne_bound(1).value == 1);
  CHECK(mersenne_bound(15).value == 32767);
  CHECK(mersenne_bound(63).value == (std::uint64_t{1} << 63) - 1);
  CHECK_FALSE(mersenne_bound(64).saturated);
  CHECK(mersenne_bound(64).value == ~std::uint64_t{0});
  CHECK(mersenne_bound(65).saturated);
  CHECK(mersenne_bound(65).exponent == 65);
}

TEST_CASE("two-level baseline literal count") {
  const auto inst = io::abstract_from_json(io::load_json(QCSG_DATA_DIR "/six_primitives_abstract.json"));
  const auto tree = two_level_tree(inst.table, inst.graph);
  REQUIRE(tree);

  // Positives plus complements of vertices adjacent to every positive.
  std::size_t expected = 0;
  for (std::size_t u : inst.table.universe) {
    const auto& z = inst.table.products[u].positives;
    expected += z.size();
    for (std::size_t v = 0; v < inst.graph.size(); ++v) {
      if (std::find(z.begin(), z.end(), v) != z.end()) continue;
      expected += std::all_of(z.begin(), z.end(), [&](std::size_t w) { return inst.graph.adjacent(v, w); });
    }
  }
  CHECK(expected == 25);
  CHECK(leaf_count(*tree) == expected);
}

TEST_CASE("single primitive baseline is one leaf") {
  IntersectionGraph g({"A"});
  const std::vector<AbstractProduct> products{{{"A"}, true}};
  const ProductTable t = make_abstract_table(g, products);
  const auto tree = two_level_tree(t, g);
  REQUIRE(tree);
  CHECK(*tree == CsgTree::leaf("A"));
}
