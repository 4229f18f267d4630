#pragma once

#include <cstdint>
#include <initializer_list>

namespace unlearn {

// splitmix64 finalizer; also the basis for stream-id hashing.
std::uint64_t splitmix64(std::uint64_t& state);
std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v);

// xoshiro256++ seeded through splitmix64. The generator and the derived
// uniform/gaussian draws are fully specified here (no <random> distributions),
// so a (seed, stream) pair reproduces the same values on any platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  // Independent stream derived from a base seed and a path of indices
  // (e.g. {kind, kappa_index, rep}).
  static Rng stream(std::uint64_t base_seed, std::initializer_list<std::uint64_t> path);

  std::uint64_t next_u64();

  // uniform in [0, 1), 53-bit resolution
  double next_unit();
  // uniform in (0, 1]
  double next_unit_open0();

  // standard normal via Box-Muller; the second value of each pair is cached
  double next_gaussian();

  bool bernoulli(double p) { return next_unit() < p; }

  // uniform integer in [0, n), n >= 1 (Lemire-style rejection-free enough for
  // our n << 2^64; uses 128-bit multiply-shift)
  std::uint64_t next_below(std::uint64_t n);

 private:
  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace unlearn
