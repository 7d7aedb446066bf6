#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qcsg/cover.hpp"
#include "qcsg/geometry.hpp"
#include "qcsg/graph.hpp"
#include "qcsg/products.hpp"
#include "qcsg/qubo.hpp"

namespace qcsg {

enum class CoverSolver { Dlx, QuboExact, QuboSa };
enum class CliqueMethod { BronKerbosch, QuboSaExperimental };

std::string to_string(CoverSolver solver);
std::string to_string(CliqueMethod method);
CoverSolver parse_cover_solver(const std::string& text);
CliqueMethod parse_clique_method(const std::string& text);
CoverMode parse_cover_mode(const std::string& text);

inline constexpr const char* kReportSchema = "qcsg.report/1";

struct PipelineConfig {
  CoverMode mode = CoverMode::Partitioned;
  CoverSolver solver = CoverSolver::Dlx;
  CliqueMethod clique_method = CliqueMethod::BronKerbosch;
  std::size_t graph_samples = 4096;
  std::size_t region_samples = 2048;
  std::uint64_t seed = 1;
  double tau_in = 0.95;
  double tau_out = 0.05;
  std::optional<double> penalty_a;
  std::optional<double> penalty_b;
  std::optional<AnnealSchedule> schedule;
  /// Off-surface points compared against the oracle.
  std::size_t agreement_samples = 10000;
  /// Points closer than this fraction of the scene diagonal to a surface are skipped.
  double surface_margin = 0.01;
  double agreement_threshold = 0.999;
};

struct SolverInfo {
  std::string name;
  std::size_t variables = 0;
  std::size_t subsets_used = 0;
  std::size_t total_literals = 0;
  std::optional<double> energy;
  std::optional<double> penalty_a;
  std::optional<double> penalty_b;
  std::optional<double> literal_weight;
  std::optional<std::uint64_t> seed;
};

struct Agreement {
  std::size_t evaluated = 0;
  std::size_t skipped_near_surface = 0;
  std::size_t agreed = 0;

  double fraction() const {
    return evaluated ? static_cast<double>(agreed) / static_cast<double>(evaluated) : 1.0;
  }
};

struct CompressionReport {
  CsgTree tree = CsgTree::leaf("?");
  std::size_t leaf_count = 0;
  std::size_t two_level_leaf_count = 0;
  double reduction = 0.0;
  IntersectionGraph graph;
  ProductTable table;
  std::vector<Clique> cliques;
  CandidateBounds bounds;
  CoverInstance instance;
  CoverSolution solution;
  SolverInfo solver;
  std::optional<Agreement> agreement;  // absent in abstract mode
  std::vector<std::string> warnings;
  PipelineConfig config;
};

/// Graph, cliques, products, candidates, cover and tree assembly over real
/// geometry. Errors carry the failing stage in their message.
CompressionReport compress(const PrimitiveSet& primitives, const SolidOracle& oracle,
                           const PipelineConfig& config);

/// Same pipeline from a given graph and product table (no geometry).
CompressionReport compress_abstract(const IntersectionGraph& graph, const ProductTable& table,
                                    const PipelineConfig& config);

/// Compares `tree` with `oracle` on uniform points of the padded scene box,
/// skipping points within `margin` of any primitive or oracle surface.
Agreement measure_agreement(const CsgTree& tree, const PrimitiveSet& primitives,
                            const SolidOracle& oracle, std::size_t samples, double margin,
                            std::uint64_t seed);

/// Maximal cliques found by annealing the max-clique QUBO: each seed set is
/// grown to a maximum clique of its common neighbourhood, then greedily to a
/// maximal clique. Every vertex is used as a seed in addition to `seeds`.
std::vector<Clique> cliques_by_annealing(const IntersectionGraph& graph,
                                         const std::vector<std::vector<std::size_t>>& seeds,
                                         std::uint64_t seed);

struct CoverRun {
  CoverSolution solution;
  SolverInfo info;
};

/// Solves `instance` with the configured solver; QUBO routes are checked for
/// exactness and throw Error(Unsatisfiable) when the result is not a cover.
CoverRun solve_cover(const CoverInstance& instance, const PipelineConfig& config);

nlohmann::ordered_json report_json(const CompressionReport& report, bool include_timestamp);
std::string report_text(const CompressionReport& report);

}  // namespace qcsg
