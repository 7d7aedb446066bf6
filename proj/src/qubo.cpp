#include "qcsg/qubo.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "qcsg/error.hpp"
#include "qcsg/random.hpp"

namespace qcsg {

namespace {

template <class Map>
void drop_zeros(Map& m) {
  std::erase_if(m, [](const auto& kv) { return kv.second == 0.0; });
}

void check_indices(std::size_t n, const std::map<std::size_t, double>& lin,
                   const std::map<std::pair<std::size_t, std::size_t>, double>& quad) {
  for (const auto& [i, v] : lin) {
    if (i >= n) throw Error(ErrorKind::Structural, "linear index out of range");
  }
  for (const auto& [ij, v] : quad) {
    if (ij.first >= ij.second || ij.second >= n) {
      throw Error(ErrorKind::Structural, "quadratic key must satisfy i < j < n");
    }
  }
}

// Dense symmetric coupling rows for the local-field solvers.
struct Couplings {
  std::vector<double> linear;
  std::vector<std::vector<std::pair<std::size_t, double>>> rows;

  explicit Couplings(const Qubo& q) : linear(q.n, 0.0), rows(q.n) {
    for (const auto& [i, v] : q.linear) linear[i] += v;
    for (const auto& [ij, v] : q.quadratic) {
      rows[ij.first].emplace_back(ij.second, v);
      rows[ij.second].emplace_back(ij.first, v);
    }
  }
};

// a precedes b when, at the lowest differing bit, a holds 0.
bool lex_less(std::uint64_t a, std::uint64_t b) {
  const std::uint64_t d = a ^ b;
  if (d == 0) return false;
  return (a & (d & (~d + 1))) == 0;
}

std::vector<std::uint8_t> unpack(std::uint64_t mask, std::size_t n) {
  std::vector<std::uint8_t> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = static_cast<std::uint8_t>(mask >> i & 1);
  return x;
}

// Visits all 2^n states in Gray-code order with an incrementally updated energy.
template <class Visit>
void gray_walk(const Qubo& q, Visit&& visit) {
  const Couplings c(q);
  const std::size_t n = q.n;
  std::vector<double> field = c.linear;
  std::uint64_t mask = 0;
  double energy = q.offset;
  visit(mask, energy);
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t step = 1; step < total; ++step) {
    const auto k = static_cast<std::size_t>(std::countr_zero(step));
    const bool was_set = mask >> k & 1;
    energy += was_set ? -field[k] : field[k];
    mask ^= std::uint64_t{1} << k;
    const double delta = was_set ? -1.0 : 1.0;
    for (const auto& [j, v] : c.rows[k]) field[j] += v * delta;
    visit(mask, energy);
  }
}

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void Qubo::add_linear(std::size_t i, double value) {
  if (i >= n) throw Error(ErrorKind::Structural, "linear index out of range");
  linear[i] += value;
}

void Qubo::add_quadratic(std::size_t i, std::size_t j, double value) {
  if (i == j) return add_linear(i, value);
  if (i > j) std::swap(i, j);
  if (j >= n) throw Error(ErrorKind::Structural, "quadratic index out of range");
  quadratic[{i, j}] += value;
}

void Qubo::canonicalize() {
  check_indices(n, linear, quadratic);
  drop_zeros(linear);
  drop_zeros(quadratic);
}

double Qubo::max_abs_coefficient() const {
  double m = 0.0;
  for (const auto& [i, v] : linear) m = std::max(m, std::abs(v));
  for (const auto& [ij, v] : quadratic) m = std::max(m, std::abs(v));
  return m;
}

void IsingModel::canonicalize() {
  check_indices(n, h, J);
  drop_zeros(h);
  drop_zeros(J);
}

double qubo_energy(const Qubo& q, std::span<const std::uint8_t> x) {
  if (x.size() != q.n) {
    throw Error(ErrorKind::Parameter, "assignment length " + std::to_string(x.size()) +
                                          " does not match " + std::to_string(q.n) + " variables");
  }
  if (std::any_of(x.begin(), x.end(), [](std::uint8_t b) { return b > 1; })) {
    throw Error(ErrorKind::Parameter, "assignment entries must be 0 or 1");
  }
  double e = q.offset;
  for (const auto& [i, v] : q.linear) e += v * x[i];
  for (const auto& [ij, v] : q.quadratic) e += v * x[ij.first] * x[ij.second];
  return e;
}

double ising_energy(const IsingModel& m, std::span<const int> s) {
  if (s.size() != m.n) {
    throw Error(ErrorKind::Parameter, "spin string length " + std::to_string(s.size()) +
                                          " does not match " + std::to_string(m.n) + " spins");
  }
  if (std::any_of(s.begin(), s.end(), [](int v) { return v != 1 && v != -1; })) {
    throw Error(ErrorKind::Parameter, "spins must be -1 or +1");
  }
  double e = m.offset;
  for (const auto& [i, v] : m.h) e += v * s[i];
  for (const auto& [ij, v] : m.J) e += v * s[ij.first] * s[ij.second];
  return e;
}

IsingModel qubo_to_ising(const Qubo& q) {
  IsingModel m;
  m.n = q.n;
  m.offset = q.offset;
  for (const auto& [i, a] : q.linear) {
    m.h[i] += a / 2;
    m.offset += a / 2;
  }
  for (const auto& [ij, b] : q.quadratic) {
    m.J[ij] += b / 4;
    m.h[ij.first] += b / 4;
    m.h[ij.second] += b / 4;
    m.offset += b / 4;
  }
  m.canonicalize();
  return m;
}

Qubo ising_to_qubo(const IsingModel& m) {
  Qubo q;
  q.n = m.n;
  q.offset = m.offset;
  for (const auto& [i, h] : m.h) {
    q.linear[i] += 2 * h;
    q.offset -= h;
  }
  for (const auto& [ij, j] : m.J) {
    q.quadratic[ij] += 4 * j;
    q.linear[ij.first] -= 2 * j;
    q.linear[ij.second] -= 2 * j;
    q.offset += j;
  }
  q.canonicalize();
  return q;
}

CoverPenalties CoverPenalties::defaults(std::size_t universe_size) {
  CoverPenalties p;
  p.b = 1.0;
  p.a = static_cast<double>(universe_size) * p.b + 1.0;
  return p;
}

CoverQubo build_cover_qubo(const CoverInstance& instance, const CoverPenalties& penalties) {
  const double n = static_cast<double>(instance.universe.size());
  std::size_t max_literals = 0;
  for (const auto& s : instance.subsets) max_literals = std::max(max_literals, s.literals);
  const double per_subset = penalties.b + penalties.literal_weight * static_cast<double>(max_literals);
  if (!(penalties.b > 0.0) || penalties.literal_weight < 0.0) {
    throw Error(ErrorKind::Parameter, "cover penalty B must be positive");
  }
  if (!penalties.allow_weak_penalty && !(penalties.a > n * per_subset)) {
    std::ostringstream msg;
    msg << "penalty A = " << penalties.a << " must exceed n * B = " << n * per_subset;
    throw Error(ErrorKind::Parameter, msg.str());
  }

  CoverQubo out;
  out.qubo.n = instance.subsets.size();
  out.qubo.offset = penalties.a * n;
  std::vector<std::vector<std::size_t>> covers;
  for (std::size_t i = 0; i < instance.subsets.size(); ++i) {
    const auto& s = instance.subsets[i];
    std::vector<std::size_t> c(s.covers.begin(), s.covers.end());
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    const double weight = penalties.b + penalties.literal_weight * static_cast<double>(s.literals);
    out.qubo.add_linear(i, -penalties.a * static_cast<double>(c.size()) + weight);
    covers.push_back(std::move(c));
    out.subset_of_variable.push_back(i);
  }
  for (std::size_t i = 0; i < covers.size(); ++i) {
    for (std::size_t j = i + 1; j < covers.size(); ++j) {
      std::vector<std::size_t> both;
      std::set_intersection(covers[i].begin(), covers[i].end(), covers[j].begin(), covers[j].end(),
                            std::back_inserter(both));
      if (!both.empty()) out.qubo.add_quadratic(i, j, 2.0 * penalties.a * static_cast<double>(both.size()));
    }
  }
  out.qubo.canonicalize();
  return out;
}

CliqueQubo build_max_clique_qubo(const IntersectionGraph& graph, double a, double b) {
  if (!(a > 0.0 && b > a)) {
    throw Error(ErrorKind::Parameter, "max-clique penalties need B > A > 0");
  }
  CliqueQubo out;
  out.qubo.n = graph.size();
  for (std::size_t v = 0; v < graph.size(); ++v) {
    out.qubo.add_linear(v, -a);
    out.vertex_of_variable.push_back(v);
    for (std::size_t u = v + 1; u < graph.size(); ++u) {
      if (!graph.adjacent(u, v)) out.qubo.add_quadratic(v, u, b);
    }
  }
  out.qubo.canonicalize();
  return out;
}

SolveResult solve_exact(const Qubo& q) {
  if (q.n > kExactSolveLimit) {
    throw Error(ErrorKind::Parameter, "exact solver supports at most 30 variables, got " +
                                          std::to_string(q.n));
  }
  const double tol = 1e-9 * std::max(1.0, q.max_abs_coefficient());
  std::uint64_t best_mask = 0;
  double best = std::numeric_limits<double>::infinity();
  gray_walk(q, [&](std::uint64_t mask, double e) {
    if (e < best - tol) {
      best = e;
      best_mask = mask;
    } else if (e <= best + tol && lex_less(mask, best_mask)) {
      best = std::min(best, e);
      best_mask = mask;
    }
  });
  SolveResult r;
  r.assignment = unpack(best_mask, q.n);
  r.energy = qubo_energy(q, r.assignment);
  r.solver = "exact";
  return r;
}

std::vector<std::vector<std::uint8_t>> ground_states(const Qubo& q, double tolerance) {
  if (q.n > 24) throw Error(ErrorKind::Parameter, "ground state enumeration supports n <= 24");
  double best = std::numeric_limits<double>::infinity();
  gray_walk(q, [&](std::uint64_t, double e) { best = std::min(best, e); });
  std::vector<std::vector<std::uint8_t>> out;
  gray_walk(q, [&](std::uint64_t mask, double e) {
    if (e <= best + tolerance) out.push_back(unpack(mask, q.n));
  });
  return out;
}

AnnealSchedule AnnealSchedule::defaults(const Qubo& q) {
  AnnealSchedule s;
  s.t_start = std::max(q.max_abs_coefficient(), 0.02);
  s.t_end = 0.01;
  s.sweeps = std::max<std::size_t>(1, 1000 * q.n);
  s.restarts = 32;
  return s;
}

void AnnealSchedule::validate() const {
  if (!(t_start > 0.0 && t_end > 0.0 && t_end < t_start)) {
    throw Error(ErrorKind::Parameter, "schedule needs 0 < t_end < t_start");
  }
  if (sweeps == 0 || restarts == 0) {
    throw Error(ErrorKind::Parameter, "schedule needs at least one sweep and one restart");
  }
}

SolveResult solve_sa(const Qubo& q, const AnnealSchedule& schedule, std::uint64_t seed) {
  schedule.validate();
  const Couplings c(q);
  const std::size_t n = q.n;

  SolveResult result;
  result.solver = "sa";
  result.seed = seed;
  result.sweeps = schedule.sweeps;
  result.restarts = schedule.restarts;
  result.energy = std::numeric_limits<double>::infinity();

  const double ratio = schedule.t_end / schedule.t_start;
  const double denom = schedule.sweeps > 1 ? static_cast<double>(schedule.sweeps - 1) : 1.0;

  for (std::size_t restart = 0; restart < schedule.restarts; ++restart) {
    Rng rng(derive_seed(seed, restart));
    std::vector<std::uint8_t> x(n);
    for (auto& b : x) b = static_cast<std::uint8_t>(rng.next() >> 63);
    std::vector<double> field = c.linear;
    for (std::size_t i = 0; i < n; ++i) {
      if (!x[i]) continue;
      for (const auto& [j, v] : c.rows[i]) field[j] += v;
    }
    double energy = qubo_energy(q, x);
    double best_energy = energy;
    std::vector<std::uint8_t> best = x;

    for (std::size_t sweep = 0; sweep < schedule.sweeps; ++sweep) {
      const double t = schedule.t_start * std::pow(ratio, static_cast<double>(sweep) / denom);
      for (std::size_t i = 0; i < n; ++i) {
        const double delta = x[i] ? -field[i] : field[i];
        if (delta > 0.0) {
          // exp(-40) is below the 53-bit resolution of the uniform draw.
          if (delta > 40.0 * t || rng.uniform() >= std::exp(-delta / t)) continue;
        }
        const double dir = x[i] ? -1.0 : 1.0;
        x[i] ^= 1;
        energy += delta;
        for (const auto& [j, v] : c.rows[i]) field[j] += v * dir;
        if (energy < best_energy) {
          best_energy = energy;
          best = x;
        }
      }
    }
    const double exact = qubo_energy(q, best);
    if (exact < result.energy) {
      result.energy = exact;
      result.assignment = std::move(best);
    }
  }
  return result;
}

void write_qubo(const Qubo& q, std::ostream& out) {
  Qubo c = q;
  c.canonicalize();
  out << "c qubo written by qcsg\n";
  out << "c offset " << format_real(c.offset) << "\n";
  out << "p qubo 0 " << c.n << " " << c.linear.size() << " " << c.quadratic.size() << "\n";
  for (const auto& [i, v] : c.linear) out << i << " " << i << " " << format_real(v) << "\n";
  for (const auto& [ij, v] : c.quadratic) {
    out << ij.first << " " << ij.second << " " << format_real(v) << "\n";
  }
}

Qubo read_qubo(std::istream& in) {
  Qubo q;
  bool have_program = false;
  std::size_t expect_nodes = 0, expect_couplers = 0;
  std::set<std::size_t> nodes;
  std::string line;
  std::size_t lineno = 0;

  auto fail = [&](const std::string& what) -> Error {
    return Error(ErrorKind::Input, "qubo line " + std::to_string(lineno) + ": " + what);
  };
  auto parse_real = [&](const std::string& tok) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      throw fail("invalid number '" + tok + "'");
    }
    if (used != tok.size() || !std::isfinite(v)) throw fail("invalid number '" + tok + "'");
    return v;
  };
  auto parse_index = [&](const std::string& tok) {
    if (tok.empty() || !std::all_of(tok.begin(), tok.end(), [](char ch) { return ch >= '0' && ch <= '9'; })) {
      throw fail("invalid index '" + tok + "'");
    }
    return static_cast<std::size_t>(std::stoull(tok));
  };

  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream fields(line);
    std::vector<std::string> tok;
    for (std::string t; fields >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    if (tok[0] == "c") {
      if (tok.size() >= 3 && tok[1] == "offset") {
        if (tok.size() != 3) throw fail("malformed offset comment");
        q.offset = parse_real(tok[2]);
      }
      continue;
    }
    if (tok[0] == "p") {
      if (have_program) throw fail("duplicate program line");
      if (tok.size() != 6 || tok[1] != "qubo") {
        throw fail("expected 'p qubo <topology> <maxNodes> <nNodes> <nCouplers>'");
      }
      q.n = parse_index(tok[3]);
      expect_nodes = parse_index(tok[4]);
      expect_couplers = parse_index(tok[5]);
      have_program = true;
      continue;
    }
    if (!have_program) throw fail("entry before the program line");
    if (tok.size() != 3) throw fail("expected 'i j value'");
    const std::size_t i = parse_index(tok[0]);
    const std::size_t j = parse_index(tok[1]);
    const double v = parse_real(tok[2]);
    if (i >= q.n || j >= q.n) throw fail("index exceeds maxNodes");
    if (i == j) {
      if (!nodes.insert(i).second) throw fail("duplicate node " + std::to_string(i));
      q.linear[i] = v;
    } else {
      if (i > j) throw fail("coupler must be written with i < j");
      if (q.quadratic.contains({i, j})) {
        throw fail("duplicate coupler " + std::to_string(i) + " " + std::to_string(j));
      }
      q.quadratic[{i, j}] = v;
    }
  }
  if (!have_program) throw Error(ErrorKind::Input, "qubo file has no program line");
  if (nodes.size() != expect_nodes || q.quadratic.size() != expect_couplers) {
    throw Error(ErrorKind::Input, "qubo file entry counts disagree with the program line");
  }
  q.canonicalize();
  return q;
}

void export_qubo(const Qubo& q, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Input, "cannot write " + path.string());
  write_qubo(q, out);
}

Qubo import_qubo(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Input, "cannot read " + path.string());
  return read_qubo(in);
}

}  // namespace qcsg
