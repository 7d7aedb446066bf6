#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qcsg/geometry.hpp"
#include "qcsg/graph.hpp"
#include "qcsg/products.hpp"

namespace qcsg {

/// Intersection of literals: `positive` primitives and complements of `negative` ones.
struct Conjunction {
  std::vector<std::size_t> positive;  // ascending primitive indices
  std::vector<std::size_t> negative;  // ascending primitive indices

  std::size_t literal_count() const { return positive.size() + negative.size(); }
  /// A product is consistent when it holds every positive literal and no negative one.
  bool consistent_with(const FundamentalProduct& product) const;
  /// Literals as (primitive, negated), ascending by primitive.
  std::vector<std::pair<std::size_t, bool>> literals() const;
  std::string render(std::span<const std::string> primitive_ids) const;
  bool operator==(const Conjunction&) const = default;
};

struct CoverSubset {
  std::string name;
  std::vector<std::size_t> covers;  // ascending positions in the universe
  std::size_t literals = 0;
  std::optional<Conjunction> expression;
  std::optional<std::size_t> source_clique;
};

struct CoverInstance {
  std::vector<std::string> universe;
  /// Primitive ids that expressions index into; empty for plain set instances.
  std::vector<std::string> primitives;
  std::vector<CoverSubset> subsets;
  /// Product index behind each universe element, for instances built from a table.
  std::vector<std::size_t> universe_products;

  /// Universe positions covered by no subset.
  std::vector<std::size_t> uncovered_elements() const;
};

enum class CoverMode { Partitioned, Global };

std::string to_string(CoverMode mode);

/// Candidate conjunctions whose consistent products are non-empty and all
/// inside. Partitioned mode enumerates literal patterns per clique and extends
/// each with complements of out-of-clique neighbours of its positive literals.
/// Throws Error(Infeasible) naming the first universe element left uncovered.
CoverInstance generate_candidates(const ProductTable& table, std::span<const Clique> cliques,
                                  const IntersectionGraph& graph, CoverMode mode);

struct CoverSolution {
  std::vector<std::size_t> selected;  // ascending subset indices
  std::size_t subsets_used = 0;
  std::size_t total_literals = 0;
};

/// Smallest exact cover by Algorithm X over dancing links; ties go to fewer
/// literals, then the lexicographically smallest index set. Throws
/// Error(Unsatisfiable) when no exact cover exists.
CoverSolution solve_cover_dlx(const CoverInstance& instance);

/// Calls `visit` with every exact cover (ascending subset indices). Returns the count.
std::size_t enumerate_exact_covers(const CoverInstance& instance,
                                   const std::function<void(std::span<const std::size_t>)>& visit);

CoverSolution make_solution(const CoverInstance& instance, std::vector<std::size_t> selected);

/// Union of the selected conjunctions. Throws Error(Structural) on an empty
/// selection or a subset without an expression.
CsgTree assemble_tree(const CoverSolution& solution, const CoverInstance& instance);

struct CoverViolation {
  std::size_t element;  // universe position
  std::size_t times;    // 0 uncovered, >= 2 covered more than once
};

struct CoverCheck {
  bool valid = true;
  std::vector<CoverViolation> violations;
};

CoverCheck verify_cover(const CoverInstance& instance, std::span<const std::size_t> selected);

}  // namespace qcsg
