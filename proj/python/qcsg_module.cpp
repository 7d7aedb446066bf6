#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <utility>
#include <vector>

#include "qcsg/error.hpp"
#include "qcsg/io.hpp"
#include "qcsg/pipeline.hpp"

namespace py = pybind11;
using namespace qcsg;

namespace {

PipelineConfig make_config(const std::string& mode, const std::string& solver, std::uint64_t seed,
                           std::size_t samples) {
  PipelineConfig cfg;
  cfg.mode = parse_cover_mode(mode);
  cfg.solver = parse_cover_solver(solver);
  cfg.seed = seed;
  cfg.region_samples = samples;
  return cfg;
}

std::string compress_scene(const std::string& primitives_json, const std::string& target_json,
                           const std::string& mode, const std::string& solver, std::uint64_t seed,
                           std::size_t samples) {
  const PrimitiveSet primitives = io::primitives_from_json(nlohmann::json::parse(primitives_json));
  CsgTree target = io::tree_from_json(nlohmann::json::parse(target_json));
  const SolidOracle oracle = SolidOracle::ground_truth(std::move(target), primitives);
  return report_json(compress(primitives, oracle, make_config(mode, solver, seed, samples)), false).dump();
}

std::string compress_abstract_instance(const std::string& instance_json, const std::string& mode,
                                       const std::string& solver, std::uint64_t seed) {
  const io::AbstractInstance inst = io::abstract_from_json(nlohmann::json::parse(instance_json));
  return report_json(compress_abstract(inst.graph, inst.table, make_config(mode, solver, seed, 2048)),
                     false)
      .dump();
}

std::vector<std::vector<std::string>> maximal_cliques(
    const std::vector<std::string>& vertices,
    const std::vector<std::pair<std::string, std::string>>& edges) {
  IntersectionGraph g(vertices);
  for (const auto& [a, b] : edges) g.add_edge(a, b);
  std::vector<std::vector<std::string>> out;
  for (const auto& c : maximal_cliques_bk(g)) out.push_back(c.members);
  return out;
}

std::string solve_cover_json(const std::string& instance_json, const std::string& solver,
                             std::uint64_t seed) {
  const CoverInstance instance = io::cover_instance_from_json(nlohmann::json::parse(instance_json));
  PipelineConfig cfg;
  cfg.solver = parse_cover_solver(solver);
  cfg.seed = seed;
  const CoverRun run = solve_cover(instance, cfg);
  auto j = io::solution_to_json(instance, run.solution);
  if (run.info.energy) j["energy"] = *run.info.energy;
  return j.dump();
}

Qubo make_qubo(std::size_t n, const std::map<std::size_t, double>& linear,
               const std::map<std::pair<std::size_t, std::size_t>, double>& quadratic, double offset) {
  Qubo q;
  q.n = n;
  q.offset = offset;
  for (const auto& [i, v] : linear) q.add_linear(i, v);
  for (const auto& [ij, v] : quadratic) q.add_quadratic(ij.first, ij.second, v);
  q.canonicalize();
  return q;
}

}  // namespace

PYBIND11_MODULE(_qcsg, m) {
  m.doc() = "CSG tree compression via exact cover and QUBO solvers";

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      PyErr_SetString(e.kind() == ErrorKind::Parameter ? PyExc_ValueError : PyExc_RuntimeError, e.what());
    } catch (const nlohmann::json::exception& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    }
  });

  m.def("compress_scene", &compress_scene, py::arg("primitives_json"), py::arg("target_json"),
        py::arg("mode") = "partitioned", py::arg("solver") = "dlx", py::arg("seed") = 1,
        py::arg("samples") = 2048, "Report JSON for a primitive set and ground-truth tree");
  m.def("compress_abstract", &compress_abstract_instance, py::arg("instance_json"),
        py::arg("mode") = "partitioned", py::arg("solver") = "dlx", py::arg("seed") = 1);
  m.def("maximal_cliques", &maximal_cliques, py::arg("vertices"), py::arg("edges"));
  m.def("solve_cover", &solve_cover_json, py::arg("instance_json"), py::arg("solver") = "dlx",
        py::arg("seed") = 1);

  m.def(
      "qubo_energy",
      [](std::size_t n, const std::map<std::size_t, double>& linear,
         const std::map<std::pair<std::size_t, std::size_t>, double>& quadratic, double offset,
         const std::vector<std::uint8_t>& x) {
        return qubo_energy(make_qubo(n, linear, quadratic, offset), x);
      },
      py::arg("n"), py::arg("linear"), py::arg("quadratic"), py::arg("offset"), py::arg("x"));
  m.def(
      "solve_qubo",
      [](std::size_t n, const std::map<std::size_t, double>& linear,
         const std::map<std::pair<std::size_t, std::size_t>, double>& quadratic, double offset,
         const std::string& solver, std::uint64_t seed) {
        const Qubo q = make_qubo(n, linear, quadratic, offset);
        SolveResult r;
        if (solver == "exact") {
          r = solve_exact(q);
        } else if (solver == "sa") {
          r = solve_sa(q, AnnealSchedule::defaults(q), seed);
        } else {
          throw Error(ErrorKind::Parameter, "solver must be exact or sa");
        }
        return std::make_pair(r.assignment, r.energy);
      },
      py::arg("n"), py::arg("linear"), py::arg("quadratic"), py::arg("offset") = 0.0,
      py::arg("solver") = "exact", py::arg("seed") = 1);
}
