#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace qcsg {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Child seed for task `key` of a run seeded with `master`.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t key) {
  return splitmix64(splitmix64(master) ^ (key * 0xd6e8feb86659fd93ULL + 1));
}

inline std::uint64_t derive_seed(std::uint64_t master, std::span<const std::size_t> key) {
  std::uint64_t s = splitmix64(master ^ 0x5851f42d4c957f2dULL);
  for (std::size_t k : key) s = splitmix64(s ^ (k + 0x632be59bd9b4e019ULL));
  return s;
}

/// mt19937_64 plus a portable [0,1) mapping; std::uniform_real_distribution is
/// implementation-defined and would break cross-platform reproducibility.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::uint64_t next() { return engine_(); }
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace qcsg
