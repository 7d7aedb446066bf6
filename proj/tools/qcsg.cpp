// Command-line front end: compress, cliques, products, cover, qubo, eval, sample.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "qcsg/error.hpp"
#include "qcsg/io.hpp"
#include "qcsg/pipeline.hpp"
#include "qcsg/random.hpp"

namespace {

using namespace qcsg;
using nlohmann::ordered_json;

struct Common {
  std::string out;
  std::uint64_t seed = 1;
  bool no_timestamp = false;
};

struct SolverFlags {
  std::string solver = "dlx";
  std::optional<double> penalty_a;
  std::optional<double> penalty_b;
  std::string schedule;
};

void emit(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    io::write_text(out, text);
  }
}

void emit_json(const ordered_json& j, const std::string& out) { emit(j.dump(2) + "\n", out); }

// "t_start,t_end,sweeps,restarts"
std::optional<AnnealSchedule> parse_schedule(const std::string& text) {
  if (text.empty()) return std::nullopt;
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string part; std::getline(ss, part, ',');) parts.push_back(part);
  if (parts.size() != 4) {
    throw Error(ErrorKind::Parameter, "--schedule expects t_start,t_end,sweeps,restarts");
  }
  AnnealSchedule s;
  try {
    s.t_start = std::stod(parts[0]);
    s.t_end = std::stod(parts[1]);
    s.sweeps = std::stoul(parts[2]);
    s.restarts = std::stoul(parts[3]);
  } catch (const std::exception&) {
    throw Error(ErrorKind::Parameter, "--schedule: invalid number in '" + text + "'");
  }
  s.validate();
  return s;
}

SolidOracle load_oracle(const PrimitiveSet& primitives, const std::string& cloud, const std::string& target) {
  if (!cloud.empty() == !target.empty()) {
    throw Error(ErrorKind::Parameter, "give exactly one of --cloud or --target");
  }
  if (!cloud.empty()) return SolidOracle::cloud(io::load_cloud(cloud));
  CsgTree tree = io::tree_from_json(io::load_json(target));
  validate(tree, primitives);
  return SolidOracle::ground_truth(std::move(tree), primitives);
}

void add_solver_flags(CLI::App* cmd, SolverFlags& f) {
  cmd->add_option("--solver", f.solver, "dlx | qubo_exact | qubo_sa")->capture_default_str();
  cmd->add_option("--penalty-a", f.penalty_a, "Exact-cover penalty A");
  cmd->add_option("--penalty-b", f.penalty_b, "Subset-count weight B");
  cmd->add_option("--schedule", f.schedule, "Annealing schedule t_start,t_end,sweeps,restarts");
}

void add_common_flags(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "Master seed")->capture_default_str();
  cmd->add_option("--out,-o", c.out, "Output path (default stdout)");
}

int run(int argc, char** argv) {
  CLI::App app{"Point-cloud to CSG compression via exact cover and QUBO solvers"};
  app.require_subcommand(1);

  // compress
  Common compress_common;
  SolverFlags compress_solver;
  std::string primitives_path, cloud_path, target_path, abstract_path, mode = "partitioned",
                                                                    clique_method = "bk", format = "json";
  std::size_t samples = 2048, graph_samples = 4096, agreement_samples = 10000;
  auto* compress = app.add_subcommand("compress", "Compress primitives and an oracle into a CSG tree");
  compress->add_option("--primitives", primitives_path, "Primitive set JSON");
  compress->add_option("--cloud", cloud_path, "Oriented point cloud (x y z nx ny nz)");
  compress->add_option("--target", target_path, "Ground-truth CSG tree JSON");
  compress->add_option("--abstract", abstract_path, "Abstract instance JSON (graph + labelled products)");
  compress->add_option("--mode", mode, "partitioned | global")->capture_default_str();
  compress->add_option("--clique-method", clique_method, "bk | qubo_sa")->capture_default_str();
  compress->add_option("--samples", samples, "Samples per product region")->capture_default_str();
  compress->add_option("--graph-samples", graph_samples, "Surface samples per primitive")->capture_default_str();
  compress->add_option("--agreement-samples", agreement_samples, "Off-surface agreement points")
      ->capture_default_str();
  compress->add_option("--format", format, "json | text")->capture_default_str();
  compress->add_flag("--no-timestamp", compress_common.no_timestamp, "Omit the timestamp field");
  add_solver_flags(compress, compress_solver);
  add_common_flags(compress, compress_common);

  // cliques
  Common cliques_common;
  std::string graph_path, method = "bk";
  auto* cliques = app.add_subcommand("cliques", "Maximal cliques of an intersection graph");
  cliques->add_option("--graph", graph_path, "Graph JSON {vertices, edges}")->required();
  cliques->add_option("--method", method, "bk | qubo_sa")->capture_default_str();
  add_common_flags(cliques, cliques_common);

  // products
  Common products_common;
  std::string products_primitives, products_cloud, products_target;
  std::size_t products_samples = 2048, products_graph_samples = 4096;
  auto* products = app.add_subcommand("products", "Fundamental product table of a primitive set");
  products->add_option("--primitives", products_primitives, "Primitive set JSON")->required();
  products->add_option("--cloud", products_cloud, "Oriented point cloud");
  products->add_option("--target", products_target, "Ground-truth CSG tree JSON");
  products->add_option("--samples", products_samples, "Samples per product region")->capture_default_str();
  products->add_option("--graph-samples", products_graph_samples, "Surface samples per primitive")
      ->capture_default_str();
  add_common_flags(products, products_common);

  // cover
  Common cover_common;
  SolverFlags cover_solver;
  std::string instance_path;
  auto* cover = app.add_subcommand("cover", "Smallest exact cover of a cover instance");
  cover->add_option("--instance", instance_path, "Cover instance JSON {universe, subsets}")->required();
  add_solver_flags(cover, cover_solver);
  add_common_flags(cover, cover_common);

  // qubo solve | export
  auto* qubo = app.add_subcommand("qubo", "Solve or export QUBO models");
  qubo->require_subcommand(1);
  Common qsolve_common;
  std::string model_path, qsolver = "exact", qschedule;
  auto* qsolve = qubo->add_subcommand("solve", "Minimize a QUBO model file");
  qsolve->add_option("model", model_path, "QUBO file")->required();
  qsolve->add_option("--solver", qsolver, "exact | sa")->capture_default_str();
  qsolve->add_option("--schedule", qschedule, "Annealing schedule t_start,t_end,sweeps,restarts");
  add_common_flags(qsolve, qsolve_common);

  Common qexport_common;
  std::string qexport_instance, qexport_graph;
  std::optional<double> qexport_a, qexport_b;
  auto* qexport = qubo->add_subcommand("export", "Write the cover or max-clique QUBO of an instance");
  qexport->add_option("--instance", qexport_instance, "Cover instance JSON");
  qexport->add_option("--graph", qexport_graph, "Graph JSON (max-clique model)");
  qexport->add_option("--penalty-a", qexport_a, "Penalty A");
  qexport->add_option("--penalty-b", qexport_b, "Penalty B");
  add_common_flags(qexport, qexport_common);

  // eval
  Common eval_common;
  std::string eval_primitives, eval_tree, eval_cloud, eval_target;
  std::size_t eval_samples = 10000;
  double eval_margin = 0.01;
  auto* eval = app.add_subcommand("eval", "Agreement of a CSG tree with a point cloud or reference tree");
  eval->add_option("--primitives", eval_primitives, "Primitive set JSON")->required();
  eval->add_option("--tree", eval_tree, "CSG tree JSON to evaluate")->required();
  eval->add_option("--cloud", eval_cloud, "Oriented point cloud");
  eval->add_option("--target", eval_target, "Reference CSG tree JSON");
  eval->add_option("--samples", eval_samples, "Off-surface query points")->capture_default_str();
  eval->add_option("--margin", eval_margin, "Surface exclusion, fraction of scene diagonal")
      ->capture_default_str();
  add_common_flags(eval, eval_common);

  // sample
  Common sample_common;
  std::string sample_primitives, sample_tree;
  std::size_t sample_count = 20000;
  auto* sample = app.add_subcommand("sample", "Oriented surface samples of a CSG tree (x y z nx ny nz)");
  sample->add_option("--primitives", sample_primitives, "Primitive set JSON")->required();
  sample->add_option("--tree", sample_tree, "CSG tree JSON")->required();
  sample->add_option("--count", sample_count, "Number of points")->capture_default_str();
  add_common_flags(sample, sample_common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_code(ErrorKind::Parameter);
  }

  if (compress->parsed()) {
    PipelineConfig cfg;
    cfg.mode = parse_cover_mode(mode);
    cfg.solver = parse_cover_solver(compress_solver.solver);
    cfg.clique_method = parse_clique_method(clique_method);
    cfg.graph_samples = graph_samples;
    cfg.region_samples = samples;
    cfg.agreement_samples = agreement_samples;
    cfg.seed = compress_common.seed;
    cfg.penalty_a = compress_solver.penalty_a;
    cfg.penalty_b = compress_solver.penalty_b;
    cfg.schedule = parse_schedule(compress_solver.schedule);
    if (format != "json" && format != "text") throw Error(ErrorKind::Parameter, "--format must be json or text");

    CompressionReport report;
    if (!abstract_path.empty()) {
      if (!primitives_path.empty() || !cloud_path.empty() || !target_path.empty()) {
        throw Error(ErrorKind::Parameter, "--abstract excludes --primitives, --cloud and --target");
      }
      const io::AbstractInstance inst = io::abstract_from_json(io::load_json(abstract_path));
      report = compress_abstract(inst.graph, inst.table, cfg);
    } else {
      if (primitives_path.empty()) throw Error(ErrorKind::Parameter, "--primitives is required");
      const PrimitiveSet primitives = io::primitives_from_json(io::load_json(primitives_path));
      const SolidOracle oracle = load_oracle(primitives, cloud_path, target_path);
      report = qcsg::compress(primitives, oracle, cfg);
    }
    if (format == "text") {
      emit(report_text(report), compress_common.out);
    } else {
      emit_json(report_json(report, !compress_common.no_timestamp), compress_common.out);
    }
    return 0;
  }

  if (cliques->parsed()) {
    const IntersectionGraph graph = io::graph_from_json(io::load_json(graph_path));
    const CliqueMethod m = parse_clique_method(method);
    const std::vector<Clique> found =
        m == CliqueMethod::BronKerbosch ? maximal_cliques_bk(graph)
                                        : cliques_by_annealing(graph, {}, cliques_common.seed);
    ordered_json j;
    j["method"] = to_string(m);
    j["cliques"] = io::cliques_to_json(found);
    emit_json(j, cliques_common.out);
    return 0;
  }

  if (products->parsed()) {
    const PrimitiveSet primitives = io::primitives_from_json(io::load_json(products_primitives));
    const SolidOracle oracle = load_oracle(primitives, products_cloud, products_target);
    // Same child seeds as `compress`, so tables match for equal --seed.
    const IntersectionGraph graph = build_intersection_graph(
        primitives, {products_graph_samples, derive_seed(products_common.seed, 1)});
    const ProductTable table = enumerate_products(
        primitives, graph, oracle, {products_samples, derive_seed(products_common.seed, 2), 0.95, 0.05});
    emit_json(io::table_to_json(table, graph), products_common.out);
    return 0;
  }

  if (cover->parsed()) {
    const CoverInstance instance = io::cover_instance_from_json(io::load_json(instance_path));
    PipelineConfig cfg;
    cfg.solver = parse_cover_solver(cover_solver.solver);
    cfg.seed = cover_common.seed;
    cfg.penalty_a = cover_solver.penalty_a;
    cfg.penalty_b = cover_solver.penalty_b;
    cfg.schedule = parse_schedule(cover_solver.schedule);
    const CoverRun run = solve_cover(instance, cfg);
    ordered_json j = io::solution_to_json(instance, run.solution);
    j["solver"] = run.info.name;
    if (run.info.energy) j["energy"] = *run.info.energy;
    if (run.info.penalty_a) j["penalty_a"] = *run.info.penalty_a;
    if (run.info.penalty_b) j["penalty_b"] = *run.info.penalty_b;
    if (run.info.seed) j["seed"] = *run.info.seed;
    emit_json(j, cover_common.out);
    return 0;
  }

  if (qsolve->parsed()) {
    const Qubo q = import_qubo(model_path);
    SolveResult r;
    if (qsolver == "exact") {
      r = solve_exact(q);
    } else if (qsolver == "sa") {
      r = solve_sa(q, parse_schedule(qschedule).value_or(AnnealSchedule::defaults(q)), qsolve_common.seed);
    } else {
      throw Error(ErrorKind::Parameter, "qubo solve: --solver must be exact or sa");
    }
    ordered_json j;
    j["solver"] = r.solver;
    j["energy"] = r.energy;
    j["assignment"] = r.assignment;
    if (qsolver == "sa") {
      j["seed"] = r.seed;
      j["sweeps"] = r.sweeps;
      j["restarts"] = r.restarts;
    }
    emit_json(j, qsolve_common.out);
    return 0;
  }

  if (qexport->parsed()) {
    if (qexport_instance.empty() == qexport_graph.empty()) {
      throw Error(ErrorKind::Parameter, "qubo export: give exactly one of --instance or --graph");
    }
    if (qexport_common.out.empty()) throw Error(ErrorKind::Parameter, "qubo export: --out is required");
    ordered_json j;
    if (!qexport_instance.empty()) {
      const CoverInstance instance = io::cover_instance_from_json(io::load_json(qexport_instance));
      CoverPenalties p = CoverPenalties::defaults(instance.universe.size());
      if (qexport_b) {
        p.b = *qexport_b;
        p.a = static_cast<double>(instance.universe.size()) * p.b + 1.0;
      }
      if (qexport_a) p.a = *qexport_a;
      const CoverQubo model = build_cover_qubo(instance, p);
      export_qubo(model.qubo, qexport_common.out);
      j["variables"] = ordered_json::array();
      for (std::size_t s : model.subset_of_variable) j["variables"].push_back(instance.subsets[s].name);
    } else {
      const IntersectionGraph graph = io::graph_from_json(io::load_json(qexport_graph));
      const CliqueQubo model = build_max_clique_qubo(graph, qexport_a.value_or(1.0), qexport_b.value_or(2.0));
      export_qubo(model.qubo, qexport_common.out);
      j["variables"] = ordered_json::array();
      for (std::size_t v : model.vertex_of_variable) j["variables"].push_back(graph.vertices()[v]);
    }
    j["path"] = qexport_common.out;
    std::cout << j.dump(2) << "\n";
    return 0;
  }

  if (sample->parsed()) {
    const PrimitiveSet primitives = io::primitives_from_json(io::load_json(sample_primitives));
    const CsgTree tree = io::tree_from_json(io::load_json(sample_tree));
    validate(tree, primitives);
    std::ostringstream out;
    io::write_cloud(sample_surface(tree, primitives, sample_count, sample_common.seed), out);
    emit(out.str(), sample_common.out);
    return 0;
  }

  if (eval->parsed()) {
    const PrimitiveSet primitives = io::primitives_from_json(io::load_json(eval_primitives));
    const CsgTree tree = io::tree_from_json(io::load_json(eval_tree));
    const SolidOracle oracle = load_oracle(primitives, eval_cloud, eval_target);
    const Agreement a = measure_agreement(tree, primitives, oracle, eval_samples, eval_margin, eval_common.seed);
    ordered_json j;
    j["evaluated"] = a.evaluated;
    j["skipped_near_surface"] = a.skipped_near_surface;
    j["agreed"] = a.agreed;
    j["fraction"] = a.fraction();
    emit_json(j, eval_common.out);
    return 0;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const qcsg::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return qcsg::exit_code(e.kind());
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return qcsg::exit_code(qcsg::ErrorKind::Input);
  }
}
