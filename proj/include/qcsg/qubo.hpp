#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qcsg/cover.hpp"
#include "qcsg/graph.hpp"

namespace qcsg {

/// offset + sum_i linear_i x_i + sum_{i<j} quadratic_ij x_i x_j over x in {0,1}^n.
struct Qubo {
  std::size_t n = 0;
  std::map<std::size_t, double> linear;
  std::map<std::pair<std::size_t, std::size_t>, double> quadratic;
  double offset = 0.0;

  void add_linear(std::size_t i, double value);
  /// i == j folds into the linear term (x_i^2 = x_i).
  void add_quadratic(std::size_t i, std::size_t j, double value);
  /// Drops zero entries.
  void canonicalize();
  double max_abs_coefficient() const;
  bool operator==(const Qubo&) const = default;
};

/// offset + sum_i h_i s_i + sum_{i<j} J_ij s_i s_j over s in {-1,+1}^n.
struct IsingModel {
  std::size_t n = 0;
  std::map<std::size_t, double> h;
  std::map<std::pair<std::size_t, std::size_t>, double> J;
  double offset = 0.0;

  void canonicalize();
  bool operator==(const IsingModel&) const = default;
};

/// Throws Error(Parameter) on a length mismatch or a non-binary entry.
double qubo_energy(const Qubo& q, std::span<const std::uint8_t> x);
/// Throws Error(Parameter) on a length mismatch or a spin outside {-1,+1}.
double ising_energy(const IsingModel& m, std::span<const int> s);

/// x = (1 + s) / 2; energies agree pointwise.
IsingModel qubo_to_ising(const Qubo& q);
/// s = 2x - 1; energies agree pointwise.
Qubo ising_to_qubo(const IsingModel& m);

struct CoverQubo {
  Qubo qubo;
  std::vector<std::size_t> subset_of_variable;
};

struct CoverPenalties {
  double a = 0.0;
  double b = 1.0;
  /// Added per literal to each subset's linear term; zero keeps the plain
  /// smallest-exact-cover energy.
  double literal_weight = 0.0;
  bool allow_weak_penalty = false;

  /// b = 1, a = n * b + 1.
  static CoverPenalties defaults(std::size_t universe_size);
};

/// A * sum_alpha (1 - sum_{i : alpha in V_i} x_i)^2 + sum_i (B + w * literals_i) x_i,
/// expanded with x_i^2 = x_i. Requires A > n * (B + w * max literals) unless
/// `allow_weak_penalty`; throws Error(Parameter) otherwise.
CoverQubo build_cover_qubo(const CoverInstance& instance, const CoverPenalties& penalties);

struct CliqueQubo {
  Qubo qubo;
  std::vector<std::size_t> vertex_of_variable;
};

/// -A per vertex, +B per non-adjacent pair. With B > A the ground states are
/// exactly the maximum-clique indicators. Throws Error(Parameter) unless B > A > 0.
CliqueQubo build_max_clique_qubo(const IntersectionGraph& graph, double a = 1.0, double b = 2.0);

struct SolveResult {
  std::vector<std::uint8_t> assignment;
  double energy = 0.0;
  std::string solver;
  std::uint64_t seed = 0;
  std::size_t sweeps = 0;
  std::size_t restarts = 0;
};

constexpr std::size_t kExactSolveLimit = 30;

/// Exhaustive minimum; ties go to the lexicographically smallest bitstring
/// (x_0 first). Throws Error(Parameter) for n > 30.
SolveResult solve_exact(const Qubo& q);

/// Every minimizer within `tolerance`, in Gray-code visiting order. n <= 24.
std::vector<std::vector<std::uint8_t>> ground_states(const Qubo& q, double tolerance = 1e-9);

struct AnnealSchedule {
  double t_start = 1.0;
  double t_end = 0.01;
  std::size_t sweeps = 1000;
  std::size_t restarts = 32;

  /// t_start = max |coefficient|, t_end = 0.01, sweeps = 1000 n, restarts = 32.
  static AnnealSchedule defaults(const Qubo& q);
  /// Throws Error(Parameter) unless 0 < t_end < t_start and sweeps, restarts >= 1.
  void validate() const;
};

/// Single-flip Metropolis with geometric cooling, best of `restarts`
/// independent runs; restart r is seeded from derive_seed(seed, r).
SolveResult solve_sa(const Qubo& q, const AnnealSchedule& schedule, std::uint64_t seed);

/// qbsolv text format; the offset travels in a "c offset <value>" comment.
void write_qubo(const Qubo& q, std::ostream& out);
/// Throws Error(Input) naming the offending line.
Qubo read_qubo(std::istream& in);
void export_qubo(const Qubo& q, const std::filesystem::path& path);
Qubo import_qubo(const std::filesystem::path& path);

}  // namespace qcsg
