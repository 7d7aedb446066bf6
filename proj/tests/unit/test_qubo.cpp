#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "qcsg/error.hpp"
#include "qcsg/io.hpp"
#include "qcsg/qubo.hpp"

using namespace qcsg;

namespace {

Qubo random_qubo(std::mt19937_64& gen, std::size_t n, double density = 0.6) {
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  std::bernoulli_distribution keep(density);
  Qubo q;
  q.n = n;
  for (std::size_t i = 0; i < n; ++i) q.add_linear(i, coef(gen));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (keep(gen)) q.add_quadratic(i, j, coef(gen));
    }
  }
  q.offset = coef(gen);
  q.canonicalize();
  return q;
}

std::vector<std::uint8_t> bits(std::uint64_t mask, std::size_t n) {
  std::vector<std::uint8_t> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = (mask >> i) & 1;
  return x;
}

// Direct sum over the coefficient maps.
double direct_energy(const Qubo& q, const std::vector<std::uint8_t>& x) {
  double e = q.offset;
  for (const auto& [i, v] : q.linear) e += v * x[i];
  for (const auto& [ij, v] : q.quadratic) e += v * x[ij.first] * x[ij.second];
  return e;
}

double brute_min(const Qubo& q) {
  double best = INFINITY;
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << q.n); ++m) best = std::min(best, direct_energy(q, bits(m, q.n)));
  return best;
}

}  // namespace

TEST_CASE("qubo energy and canonical form") {
  Qubo q;
  q.n = 3;
  q.add_linear(0, 1.0);
  q.add_quadratic(2, 1, -2.0);
  q.add_quadratic(1, 1, 0.5);  // diagonal folds into linear
  q.offset = 0.25;
  q.canonicalize();
  CHECK(q.quadratic.count({1, 2}) == 1);
  CHECK(q.linear.at(1) == doctest::Approx(0.5));
  const std::vector<std::uint8_t> x{1, 1, 1};
  CHECK(qubo_energy(q, x) == doctest::Approx(1.0 - 2.0 + 0.5 + 0.25));
  const std::vector<std::uint8_t> wrong{1, 1};
  CHECK_THROWS_AS(qubo_energy(q, wrong), Error);
  const std::vector<std::uint8_t> not_binary{1, 2, 0};
  CHECK_THROWS_AS(qubo_energy(q, not_binary), Error);
}

TEST_CASE("QUBO and Ising energies agree on every assignment") {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 30; ++trial) {
    const Qubo q = random_qubo(gen, 1 + trial % 10);
    const IsingModel m = qubo_to_ising(q);
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << q.n); ++mask) {
      const auto x = bits(mask, q.n);
      std::vector<int> s(q.n);
      for (std::size_t i = 0; i < q.n; ++i) s[i] = x[i] ? 1 : -1;
      CHECK(ising_energy(m, s) == doctest::Approx(qubo_energy(q, x)).epsilon(1e-12));
      CHECK(qubo_energy(q, x) == doctest::Approx(direct_energy(q, x)).epsilon(1e-12));
    }
    const Qubo back = ising_to_qubo(m);
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << q.n); ++mask) {
      CHECK(qubo_energy(back, bits(mask, q.n)) == doctest::Approx(qubo_energy(q, bits(mask, q.n))).epsilon(1e-12));
    }
  }
}

TEST_CASE("exact solver finds the brute-force minimum with lexicographic ties") {
  std::mt19937_64 gen(8);
  for (int trial = 0; trial < 40; ++trial) {
    const Qubo q = random_qubo(gen, 1 + trial % 12);
    const SolveResult r = solve_exact(q);
    CHECK(r.energy == doctest::Approx(brute_min(q)).epsilon(1e-12));
    CHECK(qubo_energy(q, r.assignment) == doctest::Approx(r.energy));
  }
  Qubo flat;
  flat.n = 3;
  CHECK(solve_exact(flat).assignment == std::vector<std::uint8_t>{0, 0, 0});
  Qubo big;
  big.n = 31;
  CHECK_THROWS_AS(solve_exact(big), Error);
}

TEST_CASE("ground states list every minimiser") {
  Qubo q;
  q.n = 2;
  q.add_linear(0, -1.0);
  q.add_linear(1, -1.0);
  q.add_quadratic(0, 1, 1.0);
  const auto gs = ground_states(q);
  CHECK(gs.size() == 3);
}

TEST_CASE("cover QUBO energy matches the penalty formula") {
  std::mt19937_64 gen(12);
  const CoverInstance inst = io::cover_instance_from_json(io::load_json(QCSG_DATA_DIR "/small_exact_cover.json"));
  CoverPenalties p = CoverPenalties::defaults(inst.universe.size());
  CHECK(p.a == doctest::Approx(6.0));
  p.literal_weight = 0.01;
  CoverInstance weighted = inst;
  for (std::size_t s = 0; s < weighted.subsets.size(); ++s) weighted.subsets[s].literals = s + 1;
  const CoverQubo model = build_cover_qubo(weighted, p);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << model.qubo.n); ++mask) {
    const auto x = bits(mask, model.qubo.n);
    double expected = 0.0;
    for (std::size_t e = 0; e < weighted.universe.size(); ++e) {
      double hits = 0.0;
      for (std::size_t v = 0; v < x.size(); ++v) {
        const auto& cov = weighted.subsets[model.subset_of_variable[v]].covers;
        if (x[v] && std::find(cov.begin(), cov.end(), e) != cov.end()) hits += 1.0;
      }
      expected += p.a * (1.0 - hits) * (1.0 - hits);
    }
    for (std::size_t v = 0; v < x.size(); ++v) {
      expected += x[v] * (p.b + p.literal_weight * weighted.subsets[model.subset_of_variable[v]].literals);
    }
    CHECK(qubo_energy(model.qubo, x) == doctest::Approx(expected).epsilon(1e-12));
  }
  CoverPenalties weak{2.0, 1.0, 0.0, false};
  CHECK_THROWS_AS(build_cover_qubo(inst, weak), Error);
  weak.allow_weak_penalty = true;
  CHECK_NOTHROW(build_cover_qubo(inst, weak));
}

TEST_CASE("small cover QUBO optimum") {
  const CoverInstance inst = io::cover_instance_from_json(io::load_json(QCSG_DATA_DIR "/small_exact_cover.json"));
  const CoverQubo model = build_cover_qubo(inst, {6.0, 1.0, 0.0, false});
  const SolveResult r = solve_exact(model.qubo);
  CHECK(r.energy == doctest::Approx(3.0));
  std::vector<std::string> chosen;
  for (std::size_t v = 0; v < r.assignment.size(); ++v) {
    if (r.assignment[v]) chosen.push_back(inst.subsets[model.subset_of_variable[v]].name);
  }
  CHECK(chosen == std::vector<std::string>{"V1", "V5", "V7"});
}

TEST_CASE("max-clique QUBO ground states are maximum cliques") {
  IntersectionGraph g({"A", "B", "C", "D", "E", "F"});
  for (auto [a, b] : std::vector<std::pair<const char*, const char*>>{
           {"A", "B"}, {"B", "C"}, {"B", "D"}, {"C", "D"}, {"B", "E"}, {"D", "E"}, {"E", "F"}}) {
    g.add_edge(a, b);
  }
  const CliqueQubo model = build_max_clique_qubo(g, 1.0, 2.0);
  const auto gs = ground_states(model.qubo);
  REQUIRE(gs.size() == 2);
  CHECK(solve_exact(model.qubo).energy == doctest::Approx(-3.0));
  std::set<std::vector<std::string>> found;
  for (const auto& x : gs) {
    std::vector<std::string> members;
    for (std::size_t v = 0; v < x.size(); ++v) {
      if (x[v]) members.push_back(g.vertices()[model.vertex_of_variable[v]]);
    }
    found.insert(members);
  }
  CHECK(found == std::set<std::vector<std::string>>{{"B", "C", "D"}, {"B", "D", "E"}});
  CHECK_THROWS_AS(build_max_clique_qubo(g, 2.0, 1.0), Error);
}

TEST_CASE("simulated annealing is deterministic and finds small minima") {
  std::mt19937_64 gen(31);
  for (int trial = 0; trial < 10; ++trial) {
    const Qubo q = random_qubo(gen, 4 + trial);
    const AnnealSchedule s = AnnealSchedule::defaults(q);
    const SolveResult a = solve_sa(q, s, 17);
    const SolveResult b = solve_sa(q, s, 17);
    CHECK(a.assignment == b.assignment);
    CHECK(a.energy == b.energy);
    CHECK(a.energy == doctest::Approx(solve_exact(q).energy).epsilon(1e-9));
  }
  AnnealSchedule bad;
  bad.t_start = 0.001;
  bad.t_end = 0.01;
  CHECK_THROWS_AS(bad.validate(), Error);
  Qubo q;
  q.n = 2;
  bad.t_start = 1.0;
  bad.sweeps = 0;
  CHECK_THROWS_AS(solve_sa(q, bad, 1), Error);
}

TEST_CASE("qbsolv file round trip") {
  std::mt19937_64 gen(44);
  for (int trial = 0; trial < 20; ++trial) {
    const Qubo q = random_qubo(gen, 1 + trial % 12);
    std::stringstream buf;
    write_qubo(q, buf);
    const Qubo back = read_qubo(buf);
    CHECK(back.n == q.n);
    CHECK(back.offset == q.offset);
    CHECK(back.linear == q.linear);
    CHECK(back.quadratic == q.quadratic);
  }
}

TEST_CASE("qbsolv parse errors") {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return read_qubo(in);
  };
  CHECK_NOTHROW(parse("c comment\np qubo 0 2 2 1\n0 0 1.5\n1 1 -1\n0 1 2\n"));
  CHECK_THROWS_AS(parse("0 0 1\n"), Error);                              // no p line
  CHECK_THROWS_AS(parse("p qubo 0 2 1 0\n0 0 1\n0 0 2\n"), Error);       // duplicate node
  CHECK_THROWS_AS(parse("p qubo 0 2 2 1\n0 0 1\n1 1 1\n1 0 2\n"), Error); // i > j
  CHECK_THROWS_AS(parse("p qubo 0 2 1 0\n5 5 1\n"), Error);              // out of range
  CHECK_THROWS_AS(parse("p qubo 0 2 2 0\n0 0 1\n"), Error);              // count mismatch
  try {
    parse("p qubo 0 2 1 0\n0 0 x\n");
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}
