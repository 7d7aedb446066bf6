#include "qcsg/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <iomanip>
#include <sstream>

#include "qcsg/error.hpp"
#include "qcsg/io.hpp"
#include "qcsg/random.hpp"

namespace qcsg {

namespace {

// Child-seed keys for the pipeline stages.
enum SeedKey : std::uint64_t { kGraphSeed = 1, kProductSeed = 2, kAgreementSeed = 3, kCliqueSeed = 4 };

template <class F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.kind(), std::string(name) + ": " + e.what());
  }
}

std::vector<std::size_t> decode_selection(const std::vector<std::uint8_t>& x,
                                          const std::vector<std::size_t>& subset_of_variable) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i]) out.push_back(subset_of_variable[i]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

CoverPenalties penalties_for(const CoverInstance& instance, const PipelineConfig& config) {
  const double n = static_cast<double>(instance.universe.size());
  std::size_t max_literals = 0;
  for (const auto& s : instance.subsets) max_literals = std::max(max_literals, s.literals);

  CoverPenalties p;
  p.b = config.penalty_b.value_or(1.0);
  // An exact cover uses at most n subsets, so the literal term stays below one B.
  p.literal_weight = p.b / (n * static_cast<double>(max_literals) + 1.0);
  p.a = config.penalty_a.value_or(n * p.b + std::max(1.0, p.b));
  return p;
}

nlohmann::ordered_json bound_json(const CountBound& b) {
  if (!b.saturated) return b.value;
  if (b.exponent) return "2^" + std::to_string(b.exponent) + "-1";
  return ">" + std::to_string(b.value);
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

CompressionReport finish(IntersectionGraph graph, ProductTable table, const PipelineConfig& config) {
  CompressionReport report;
  report.config = config;
  report.warnings = table.warnings;

  report.cliques = stage("cliques", [&] {
    if (config.clique_method == CliqueMethod::BronKerbosch) return maximal_cliques_bk(graph);
    std::vector<std::vector<std::size_t>> seeds;
    for (const auto& p : table.products) seeds.push_back(p.positives);
    return cliques_by_annealing(graph, seeds, derive_seed(config.seed, kCliqueSeed));
  });
  report.bounds = candidate_bounds(table, report.cliques);

  if (table.universe.empty()) {
    throw Error(ErrorKind::Infeasible, "products: no fundamental product lies inside the target");
  }
  report.instance = stage("candidates", [&] {
    return generate_candidates(table, report.cliques, graph, config.mode);
  });
  const CountBound& limit =
      config.mode == CoverMode::Partitioned ? *report.bounds.partitioned : report.bounds.global;
  if (!limit.saturated && report.instance.subsets.size() > limit.value) {
    report.warnings.push_back("candidate count exceeds the " + to_string(config.mode) + " bound");
  }

  CoverRun run = stage("cover", [&] { return solve_cover(report.instance, config); });
  if (!verify_cover(report.instance, run.solution.selected).valid) {
    throw Error(ErrorKind::Unsatisfiable, "cover: selected subsets are not an exact cover");
  }
  if (config.solver != CoverSolver::Dlx) {
    const CoverSolution reference = solve_cover_dlx(report.instance);
    if (std::tie(reference.subsets_used, reference.total_literals) !=
        std::tie(run.solution.subsets_used, run.solution.total_literals)) {
      std::ostringstream msg;
      msg << to_string(config.solver) << " cover (" << run.solution.subsets_used << " subsets, "
          << run.solution.total_literals << " literals) differs from the exact optimum ("
          << reference.subsets_used << ", " << reference.total_literals << ")";
      report.warnings.push_back(msg.str());
    }
  }
  report.solution = run.solution;
  report.solver = run.info;

  report.tree = assemble_tree(report.solution, report.instance);
  report.leaf_count = leaf_count(report.tree);
  if (const auto baseline = two_level_tree(table, graph)) {
    report.two_level_leaf_count = leaf_count(*baseline);
  }
  if (report.two_level_leaf_count > 0) {
    report.reduction = 1.0 - static_cast<double>(report.leaf_count) /
                                 static_cast<double>(report.two_level_leaf_count);
  }
  report.graph = std::move(graph);
  report.table = std::move(table);
  return report;
}

}  // namespace

std::string to_string(CoverSolver solver) {
  switch (solver) {
    case CoverSolver::Dlx:
      return "dlx";
    case CoverSolver::QuboExact:
      return "qubo_exact";
    case CoverSolver::QuboSa:
      return "qubo_sa";
  }
  return "unknown";
}

std::string to_string(CliqueMethod method) {
  return method == CliqueMethod::BronKerbosch ? "bk" : "qubo_sa_experimental";
}

CoverSolver parse_cover_solver(const std::string& text) {
  if (text == "dlx") return CoverSolver::Dlx;
  if (text == "qubo_exact") return CoverSolver::QuboExact;
  if (text == "qubo_sa") return CoverSolver::QuboSa;
  throw Error(ErrorKind::Parameter, "unknown cover solver '" + text + "'");
}

CliqueMethod parse_clique_method(const std::string& text) {
  if (text == "bk") return CliqueMethod::BronKerbosch;
  if (text == "qubo_sa" || text == "qubo_sa_experimental") return CliqueMethod::QuboSaExperimental;
  throw Error(ErrorKind::Parameter, "unknown clique method '" + text + "'");
}

CoverMode parse_cover_mode(const std::string& text) {
  if (text == "partitioned") return CoverMode::Partitioned;
  if (text == "global") return CoverMode::Global;
  throw Error(ErrorKind::Parameter, "unknown mode '" + text + "'");
}

CoverRun solve_cover(const CoverInstance& instance, const PipelineConfig& config) {
  CoverRun run;
  run.info.name = to_string(config.solver);
  if (config.solver == CoverSolver::Dlx) {
    run.solution = solve_cover_dlx(instance);
  } else {
    if (!instance.uncovered_elements().empty()) {
      throw Error(ErrorKind::Unsatisfiable, "some universe element is covered by no subset");
    }
    const CoverPenalties penalties = penalties_for(instance, config);
    const CoverQubo model = build_cover_qubo(instance, penalties);
    run.info.variables = model.qubo.n;
    run.info.penalty_a = penalties.a;
    run.info.penalty_b = penalties.b;
    run.info.literal_weight = penalties.literal_weight;

    SolveResult result;
    if (config.solver == CoverSolver::QuboExact) {
      if (model.qubo.n > kExactSolveLimit) {
        throw Error(ErrorKind::Parameter, "qubo_exact supports at most 30 candidates, instance has " +
                                              std::to_string(model.qubo.n));
      }
      result = solve_exact(model.qubo);
    } else {
      const AnnealSchedule schedule = config.schedule.value_or(AnnealSchedule::defaults(model.qubo));
      result = solve_sa(model.qubo, schedule, config.seed);
      run.info.seed = config.seed;
    }
    run.info.energy = result.energy;
    run.solution = make_solution(instance, decode_selection(result.assignment, model.subset_of_variable));
    if (!verify_cover(instance, run.solution.selected).valid) {
      std::ostringstream msg;
      msg << run.info.name << " minimum (energy " << result.energy << ") is not an exact cover";
      throw Error(ErrorKind::Unsatisfiable, msg.str());
    }
  }
  run.info.subsets_used = run.solution.subsets_used;
  run.info.total_literals = run.solution.total_literals;
  return run;
}

CompressionReport compress(const PrimitiveSet& primitives, const SolidOracle& oracle,
                           const PipelineConfig& config) {
  if (primitives.empty()) throw Error(ErrorKind::Structural, "graph: no primitives");
  IntersectionGraph graph = stage("graph", [&] {
    return build_intersection_graph(primitives,
                                    {config.graph_samples, derive_seed(config.seed, kGraphSeed)});
  });
  ProductTable table = stage("products", [&] {
    ProductConfig pc{config.region_samples, derive_seed(config.seed, kProductSeed), config.tau_in,
                     config.tau_out};
    return enumerate_products(primitives, graph, oracle, pc);
  });
  CompressionReport report = finish(std::move(graph), std::move(table), config);

  report.agreement = measure_agreement(report.tree, primitives, oracle, config.agreement_samples,
                                       config.surface_margin,
                                       derive_seed(config.seed, kAgreementSeed));
  if (report.agreement->fraction() < config.agreement_threshold) {
    std::ostringstream msg;
    msg << "oracle agreement " << report.agreement->fraction() << " below "
        << config.agreement_threshold;
    report.warnings.push_back(msg.str());
  }
  return report;
}

CompressionReport compress_abstract(const IntersectionGraph& graph, const ProductTable& table,
                                    const PipelineConfig& config) {
  if (graph.vertices() != table.primitives) {
    throw Error(ErrorKind::Structural, "products: table and graph disagree on primitives");
  }
  return finish(graph, table, config);
}

Agreement measure_agreement(const CsgTree& tree, const PrimitiveSet& primitives,
                            const SolidOracle& oracle, std::size_t samples, double margin,
                            std::uint64_t seed) {
  validate(tree, primitives);
  const Aabb scene = primitives.bounds();
  const double diagonal = scene.diagonal();
  const double eps = margin * diagonal;
  const Vec3 pad{0.05 * diagonal, 0.05 * diagonal, 0.05 * diagonal};
  const Aabb box{scene.lo - pad, scene.hi + pad};

  Agreement out;
  Rng rng(seed);
  const std::size_t max_attempts = 100 * std::max<std::size_t>(samples, 1);
  for (std::size_t attempt = 0; attempt < max_attempts && out.evaluated < samples; ++attempt) {
    const Vec3 x{rng.uniform(box.lo.x, box.hi.x), rng.uniform(box.lo.y, box.hi.y),
                 rng.uniform(box.lo.z, box.hi.z)};
    const bool near_surface =
        std::any_of(primitives.begin(), primitives.end(),
                    [&](const Primitive& p) { return std::abs(p.signed_distance(x)) < eps; }) ||
        oracle.surface_distance(x) < eps;
    if (near_surface) {
      ++out.skipped_near_surface;
      continue;
    }
    ++out.evaluated;
    out.agreed += tree_membership(tree, primitives, x) == oracle.classify(x);
  }
  return out;
}

std::vector<Clique> cliques_by_annealing(const IntersectionGraph& graph,
                                         const std::vector<std::vector<std::size_t>>& seeds,
                                         std::uint64_t seed) {
  std::vector<std::vector<std::size_t>> all;
  for (std::size_t v = 0; v < graph.size(); ++v) all.push_back({v});
  all.insert(all.end(), seeds.begin(), seeds.end());

  std::vector<std::vector<std::size_t>> found;
  auto covered = [&](const std::vector<std::size_t>& z) {
    return std::any_of(found.begin(), found.end(), [&](const std::vector<std::size_t>& k) {
      return std::includes(k.begin(), k.end(), z.begin(), z.end());
    });
  };

  for (std::size_t s = 0; s < all.size(); ++s) {
    std::vector<std::size_t> z = all[s];
    std::sort(z.begin(), z.end());
    if (!graph.is_clique(z)) throw Error(ErrorKind::Structural, "clique seed is not a clique");
    if (covered(z)) continue;

    std::vector<std::size_t> common;
    for (std::size_t v = 0; v < graph.size(); ++v) {
      if (std::binary_search(z.begin(), z.end(), v)) continue;
      if (std::all_of(z.begin(), z.end(), [&](std::size_t u) { return graph.adjacent(u, v); })) {
        common.push_back(v);
      }
    }
    std::vector<std::size_t> clique = z;
    if (!common.empty()) {
      std::vector<std::string> ids;
      for (std::size_t v : common) ids.push_back(graph.vertices()[v]);
      IntersectionGraph sub(ids);
      for (std::size_t a = 0; a < common.size(); ++a) {
        for (std::size_t b = a + 1; b < common.size(); ++b) {
          if (graph.adjacent(common[a], common[b])) sub.add_edge(a, b);
        }
      }
      const CliqueQubo model = build_max_clique_qubo(sub);
      const SolveResult r = solve_sa(model.qubo, AnnealSchedule::defaults(model.qubo),
                                     derive_seed(seed, s));
      for (std::size_t i = 0; i < r.assignment.size(); ++i) {
        if (!r.assignment[i]) continue;
        const std::size_t v = common[model.vertex_of_variable[i]];
        if (std::all_of(clique.begin(), clique.end(), [&](std::size_t u) { return graph.adjacent(u, v); })) {
          clique.push_back(v);
        }
      }
    }
    for (std::size_t v = 0; v < graph.size(); ++v) {
      if (std::find(clique.begin(), clique.end(), v) != clique.end()) continue;
      if (std::all_of(clique.begin(), clique.end(), [&](std::size_t u) { return graph.adjacent(u, v); })) {
        clique.push_back(v);
      }
    }
    std::sort(clique.begin(), clique.end());
    if (std::find(found.begin(), found.end(), clique) == found.end()) found.push_back(clique);
  }

  std::vector<Clique> out;
  for (const auto& k : found) out.push_back(make_clique(graph, k));
  sort_canonical(out);
  return out;
}

nlohmann::ordered_json report_json(const CompressionReport& report, bool include_timestamp) {
  nlohmann::ordered_json j;
  j["schema"] = kReportSchema;
  if (include_timestamp) j["timestamp"] = utc_timestamp();

  const PipelineConfig& c = report.config;
  nlohmann::ordered_json cfg;
  cfg["mode"] = to_string(c.mode);
  cfg["solver"] = to_string(c.solver);
  cfg["clique_method"] = to_string(c.clique_method);
  cfg["graph_samples"] = c.graph_samples;
  cfg["region_samples"] = c.region_samples;
  cfg["seed"] = c.seed;
  cfg["tau_in"] = c.tau_in;
  cfg["tau_out"] = c.tau_out;
  j["config"] = cfg;

  j["tree"] = io::tree_to_json(report.tree);
  j["expression"] = report.tree.to_string();
  j["leaf_count"] = report.leaf_count;
  j["two_level_leaf_count"] = report.two_level_leaf_count;
  const double baseline = static_cast<double>(report.two_level_leaf_count);
  j["reduction_pct"] =
      baseline > 0 ? 100.0 * (baseline - static_cast<double>(report.leaf_count)) / baseline : 0.0;
  j["n_f"] = report.table.n_f();
  j["universe_size"] = report.table.universe.size();
  j["universe"] = report.instance.universe;
  j["clique_count"] = report.cliques.size();
  j["cliques"] = io::cliques_to_json(report.cliques);

  nlohmann::ordered_json bounds;
  bounds["global"] = bound_json(report.bounds.global);
  bounds["partitioned"] =
      report.bounds.partitioned ? bound_json(*report.bounds.partitioned) : nlohmann::ordered_json();
  bounds["per_clique_nf"] = report.bounds.per_clique_nf;
  j["bounds"] = bounds;
  j["candidate_count"] = report.instance.subsets.size();

  nlohmann::ordered_json solver;
  solver["name"] = report.solver.name;
  solver["subsets_used"] = report.solver.subsets_used;
  solver["total_literals"] = report.solver.total_literals;
  solver["selected"] = nlohmann::ordered_json::array();
  for (std::size_t s : report.solution.selected) solver["selected"].push_back(report.instance.subsets[s].name);
  if (report.solver.variables) solver["variables"] = report.solver.variables;
  if (report.solver.energy) solver["energy"] = *report.solver.energy;
  if (report.solver.penalty_a) solver["penalty_a"] = *report.solver.penalty_a;
  if (report.solver.penalty_b) solver["penalty_b"] = *report.solver.penalty_b;
  if (report.solver.literal_weight) solver["literal_weight"] = *report.solver.literal_weight;
  if (report.solver.seed) solver["seed"] = *report.solver.seed;
  j["solver"] = solver;

  if (report.agreement) {
    nlohmann::ordered_json a;
    a["evaluated"] = report.agreement->evaluated;
    a["skipped_near_surface"] = report.agreement->skipped_near_surface;
    a["agreed"] = report.agreement->agreed;
    a["fraction"] = report.agreement->fraction();
    j["agreement"] = a;
  } else {
    j["agreement"] = nullptr;
  }
  j["warnings"] = report.warnings;
  return j;
}

std::string report_text(const CompressionReport& report) {
  std::ostringstream out;
  out << "tree: " << report.tree.to_string() << "\n";
  out << "leaf_count: " << report.leaf_count << "\n";
  out << "two_level_leaf_count: " << report.two_level_leaf_count << "\n";
  std::ostringstream pct;
  pct << std::fixed << std::setprecision(1) << 100.0 * report.reduction;
  out << "reduction: " << pct.str() << "%\n";
  out << "n_f: " << report.table.n_f() << "\n";
  out << "|U|: " << report.table.universe.size() << "\n";
  out << "|Q|: " << report.cliques.size() << "\n";
  out << "cliques:";
  for (const auto& c : report.cliques) {
    out << " {";
    for (std::size_t i = 0; i < c.members.size(); ++i) out << (i ? "," : "") << c.members[i];
    out << "}";
  }
  out << "\n";
  out << "global_bound: " << bound_json(report.bounds.global).dump() << "\n";
  if (report.bounds.partitioned) {
    out << "partitioned_bound: " << bound_json(*report.bounds.partitioned).dump() << "\n";
  }
  out << "candidates: " << report.instance.subsets.size() << "\n";
  out << "solver: " << report.solver.name << " (" << report.solver.subsets_used << " subsets, "
      << report.solver.total_literals << " literals)\n";
  if (report.agreement) {
    out << "agreement: " << report.agreement->fraction() << " over " << report.agreement->evaluated
        << " points\n";
  }
  if (report.warnings.empty()) {
    out << "warnings: []\n";
  } else {
    out << "warnings:\n";
    for (const auto& w : report.warnings) out << "  - " << w << "\n";
  }
  return out.str();
}

}  // namespace qcsg
