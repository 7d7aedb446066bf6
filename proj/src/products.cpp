#include "qcsg/products.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

#include "qcsg/error.hpp"
#include "qcsg/random.hpp"

namespace qcsg {

namespace {

bool product_less(const FundamentalProduct& a, const FundamentalProduct& b) {
  if (a.positives.size() != b.positives.size()) return a.positives.size() < b.positives.size();
  return a.positives < b.positives;
}

void finalize(ProductTable& table) {
  std::sort(table.products.begin(), table.products.end(), product_less);
  table.universe.clear();
  for (std::size_t i = 0; i < table.products.size(); ++i) {
    if (table.products[i].label == ProductLabel::Inside) table.universe.push_back(i);
  }
}

ProductLabel classify_fraction(double fraction, const ProductConfig& cfg) {
  if (fraction >= cfg.tau_in) return ProductLabel::Inside;
  if (fraction <= cfg.tau_out) return ProductLabel::Outside;
  return ProductLabel::Mixed;
}

// Depth-first walk over all cliques; `visit` sees each clique once, in
// ascending-index order of its members.
template <class Visit>
void walk_cliques(const IntersectionGraph& graph, std::vector<std::size_t>& current,
                  std::size_t next, Visit& visit) {
  for (std::size_t v = next; v < graph.size(); ++v) {
    const bool extends = std::all_of(current.begin(), current.end(),
                                     [&](std::size_t u) { return graph.adjacent(u, v); });
    if (!extends) continue;
    current.push_back(v);
    visit(current);
    walk_cliques(graph, current, v + 1, visit);
    current.pop_back();
  }
}

}  // namespace

std::string to_string(ProductLabel label) {
  switch (label) {
    case ProductLabel::Inside:
      return "inside";
    case ProductLabel::Outside:
      return "outside";
    case ProductLabel::Mixed:
      return "mixed";
  }
  return "unknown";
}

bool FundamentalProduct::contains(std::size_t primitive) const {
  return std::binary_search(positives.begin(), positives.end(), primitive);
}

std::string ProductTable::name(std::size_t i) const {
  std::string out = "{";
  const auto ids = positive_ids(i);
  for (std::size_t k = 0; k < ids.size(); ++k) {
    if (k) out += ",";
    out += ids[k];
  }
  return out + "}";
}

std::vector<std::string> ProductTable::positive_ids(std::size_t i) const {
  std::vector<std::string> ids;
  for (std::size_t p : products[i].positives) ids.push_back(primitives[p]);
  return ids;
}

std::optional<std::size_t> ProductTable::find(std::span<const std::size_t> positives) const {
  std::vector<std::size_t> key(positives.begin(), positives.end());
  std::sort(key.begin(), key.end());
  for (std::size_t i = 0; i < products.size(); ++i) {
    if (products[i].positives == key) return i;
  }
  return std::nullopt;
}

bool ProductTable::in_universe(std::size_t i) const {
  return std::binary_search(universe.begin(), universe.end(), i);
}

ProductTable enumerate_products(const PrimitiveSet& primitives, const IntersectionGraph& graph,
                                const SolidOracle& oracle, const ProductConfig& config) {
  if (graph.vertices() != primitives.ids()) {
    throw Error(ErrorKind::Structural, "intersection graph does not match the primitive set");
  }
  if (!(config.tau_out >= 0.0 && config.tau_out < config.tau_in && config.tau_in <= 1.0)) {
    throw Error(ErrorKind::Parameter, "thresholds must satisfy 0 <= tau_out < tau_in <= 1");
  }

  ProductTable table;
  table.primitives = primitives.ids();

  std::vector<Primitive> positive, negative;
  auto visit = [&](const std::vector<std::size_t>& clique) {
    positive.clear();
    negative.clear();
    for (std::size_t i = 0; i < primitives.size(); ++i) {
      (std::binary_search(clique.begin(), clique.end(), i) ? positive : negative)
          .push_back(primitives[i]);
    }
    auto samples = sample_region(positive, negative, config.samples_per_region,
                                 derive_seed(config.seed, clique));
    if (samples.empty()) return;

    std::size_t inside = 0;
    for (const auto& x : samples) inside += oracle.classify(x) == Membership::Inside;
    FundamentalProduct product;
    product.positives = clique;
    product.inside_fraction = static_cast<double>(inside) / static_cast<double>(samples.size());
    product.label = classify_fraction(product.inside_fraction, config);
    product.samples = std::move(samples);
    table.products.push_back(std::move(product));
  };
  std::vector<std::size_t> current;
  walk_cliques(graph, current, 0, visit);

  finalize(table);
  for (std::size_t i = 0; i < table.products.size(); ++i) {
    if (table.products[i].label != ProductLabel::Mixed) continue;
    std::ostringstream msg;
    msg << "mixed product " << table.name(i) << " (inside fraction "
        << table.products[i].inside_fraction << ") treated as outside";
    table.warnings.push_back(msg.str());
  }
  return table;
}

ProductTable make_abstract_table(const IntersectionGraph& graph,
                                 std::span<const AbstractProduct> products) {
  ProductTable table;
  table.primitives = graph.vertices();
  for (const auto& ap : products) {
    if (ap.positives.empty()) {
      throw Error(ErrorKind::Structural, "product with no positive primitive");
    }
    FundamentalProduct p;
    for (const auto& id : ap.positives) p.positives.push_back(graph.index_of(id));
    std::sort(p.positives.begin(), p.positives.end());
    if (std::adjacent_find(p.positives.begin(), p.positives.end()) != p.positives.end()) {
      throw Error(ErrorKind::Structural, "product lists a primitive twice");
    }
    if (!graph.is_clique(p.positives)) {
      throw Error(ErrorKind::Structural,
                  "product positives are not a clique of the intersection graph");
    }
    p.label = ap.inside ? ProductLabel::Inside : ProductLabel::Outside;
    p.inside_fraction = ap.inside ? 1.0 : 0.0;
    table.products.push_back(std::move(p));
  }
  finalize(table);
  for (std::size_t i = 1; i < table.products.size(); ++i) {
    if (table.products[i].positives == table.products[i - 1].positives) {
      throw Error(ErrorKind::Structural, "duplicate product " + table.name(i));
    }
  }
  return table;
}

CountBound mersenne_bound(std::size_t k) {
  if (k > 64) return {std::numeric_limits<std::uint64_t>::max(), true, static_cast<unsigned>(k)};
  const std::uint64_t value = k == 64 ? std::numeric_limits<std::uint64_t>::max()
                                      : (std::uint64_t{1} << k) - 1;
  return {value, false, static_cast<unsigned>(k)};
}

CandidateBounds candidate_bounds(const ProductTable& table, std::span<const Clique> cliques) {
  CandidateBounds out;
  out.global = mersenne_bound(table.n_f());
  if (cliques.empty()) return out;

  CountBound sum{0, false, 0};
  for (const auto& clique : cliques) {
    std::size_t nf = 0;
    for (std::size_t i = 0; i < table.products.size(); ++i) {
      const auto ids = table.positive_ids(i);
      nf += std::all_of(ids.begin(), ids.end(),
                        [&](const std::string& id) { return clique.contains(id); });
    }
    out.per_clique_nf.push_back(nf);
    const CountBound term = mersenne_bound(nf);
    if (term.saturated || sum.value > std::numeric_limits<std::uint64_t>::max() - term.value) {
      sum = {std::numeric_limits<std::uint64_t>::max(), true, 0};
    } else if (!sum.saturated) {
      sum.value += term.value;
    }
  }
  out.partitioned = sum;
  return out;
}

std::optional<CsgTree> two_level_tree(const ProductTable& table, const IntersectionGraph& graph) {
  if (table.universe.empty()) return std::nullopt;
  std::vector<CsgTree> terms;
  for (std::size_t u : table.universe) {
    const auto& pos = table.products[u].positives;
    std::vector<CsgTree> literals;
    for (std::size_t v = 0; v < table.primitives.size(); ++v) {
      if (std::binary_search(pos.begin(), pos.end(), v)) {
        literals.push_back(CsgTree::leaf(table.primitives[v]));
        continue;
      }
      const bool adjacent_to_all = std::all_of(
          pos.begin(), pos.end(), [&](std::size_t p) { return graph.adjacent(p, v); });
      if (adjacent_to_all) literals.push_back(CsgTree::complement(CsgTree::leaf(table.primitives[v])));
    }
    terms.push_back(literals.size() == 1 ? std::move(literals.front())
                                         : CsgTree::intersect(std::move(literals)));
  }
  if (terms.size() == 1) return std::move(terms.front());
  return CsgTree::unite(std::move(terms));
}

}  // namespace qcsg
