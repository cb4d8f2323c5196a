#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "soccp/types.hpp"

namespace soccp {

// Deterministic splittable generator for seeded pseudo-random draws.
struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in (0, 1).
  double uniform() {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
  }

  double gauss();
  Vec gauss_vec(int dim);
};

// Van der Corput radical inverse in the given prime base.
double radical_inverse(std::uint64_t index, int base);

// Low-discrepancy point in (0,1)^dim (Halton sequence, index offset by seed).
Vec halton_point(std::uint64_t index, int dim, std::uint64_t seed = 0);

// Low-discrepancy direction on the unit sphere in R^dim.
Vec sphere_point(std::uint64_t index, int dim, std::uint64_t seed = 0);

// Low-discrepancy point in the closed unit ball of R^dim.
Vec ball_point(std::uint64_t index, int dim, std::uint64_t seed = 0);

// Runs fn(i) for i in [0, n) across the given number of threads.
// Work is partitioned by index, so any output written per-index is
// identical for every thread count.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

}  // namespace soccp
