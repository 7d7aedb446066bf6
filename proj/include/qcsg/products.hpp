#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qcsg/geometry.hpp"
#include "qcsg/graph.hpp"

namespace qcsg {

enum class ProductLabel { Inside, Outside, Mixed };

std::string to_string(ProductLabel label);

/// A non-empty fundamental product, identified by the primitives that enter
/// it positively; every other primitive enters complemented.
struct FundamentalProduct {
  std::vector<std::size_t> positives;  // ascending primitive indices
  std::vector<Vec3> samples;           // witnesses; empty for abstract tables
  ProductLabel label = ProductLabel::Outside;
  double inside_fraction = 0.0;

  bool contains(std::size_t primitive) const;
};

struct ProductTable {
  std::vector<std::string> primitives;
  /// Ordered by positive-set size, then lexicographically by indices.
  std::vector<FundamentalProduct> products;
  /// Indices into `products` of the inside-labelled ones.
  std::vector<std::size_t> universe;
  std::vector<std::string> warnings;

  std::size_t n_f() const { return products.size(); }
  /// "{A,B}" style name of product `i`.
  std::string name(std::size_t i) const;
  std::vector<std::string> positive_ids(std::size_t i) const;
  std::optional<std::size_t> find(std::span<const std::size_t> positives) const;
  bool in_universe(std::size_t i) const;
};

struct ProductConfig {
  std::size_t samples_per_region = 2048;
  std::uint64_t seed = 0;
  double tau_in = 0.95;
  double tau_out = 0.05;
};

/// Walks the cliques of `graph` as candidate positive sets, samples each
/// product region and labels it against `oracle`. A product is kept iff at
/// least one sample is accepted. Mixed products add a warning.
ProductTable enumerate_products(const PrimitiveSet& primitives, const IntersectionGraph& graph,
                                const SolidOracle& oracle, const ProductConfig& config);

struct AbstractProduct {
  std::vector<std::string> positives;
  bool inside = false;
};

/// Table without geometry. Throws Error(Structural) when a positive set is
/// empty, duplicated, or not a clique of `graph`.
ProductTable make_abstract_table(const IntersectionGraph& graph,
                                 std::span<const AbstractProduct> products);

/// 2^k - 1 style counts; `saturated` once the value no longer fits in 64 bits.
struct CountBound {
  std::uint64_t value = 0;
  bool saturated = false;
  unsigned exponent = 0;  // set for single 2^k - 1 bounds

  bool operator==(const CountBound&) const = default;
};

CountBound mersenne_bound(std::size_t k);

struct CandidateBounds {
  CountBound global;
  std::optional<CountBound> partitioned;
  std::vector<std::size_t> per_clique_nf;
};

/// Global bound 2^{n_f} - 1 on the number of candidate subsets and, given a
/// clique partition, the sum over cliques of 2^{n_f^j} - 1 where n_f^j counts
/// products whose positive set lies inside clique j.
CandidateBounds candidate_bounds(const ProductTable& table,
                                 std::span<const Clique> cliques = {});

/// Union over inside products of each product's positive literals plus the
/// complement of every primitive adjacent to all of them; the remaining
/// complements are implied by the intersection graph. Empty universe gives
/// nullopt.
std::optional<CsgTree> two_level_tree(const ProductTable& table, const IntersectionGraph& graph);

}  // namespace qcsg
