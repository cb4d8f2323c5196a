#include "soccp/sampling.hpp"

#include <cmath>
#include <thread>

namespace soccp {

namespace {

constexpr int kPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31,  37,
                           41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83,  89,
                           97, 101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151,
                           157, 163, 167, 173, 179, 181, 191, 193, 197, 199};
constexpr int kNumPrimes = sizeof(kPrimes) / sizeof(kPrimes[0]);

double box_muller(double u1, double u2, bool second) {
  double r = std::sqrt(-2.0 * std::log(u1));
  double a = 2.0 * M_PI * u2;
  return second ? r * std::sin(a) : r * std::cos(a);
}

}  // namespace

double SplitMix64::gauss() {
  double u1 = uniform();
  double u2 = uniform();
  return box_muller(u1, u2, false);
}

Vec SplitMix64::gauss_vec(int dim) {
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v(i) = gauss();
  return v;
}

double radical_inverse(std::uint64_t index, int base) {
  double inv_base = 1.0 / base;
  double result = 0.0;
  double frac = inv_base;
  while (index > 0) {
    result += static_cast<double>(index % base) * frac;
    index /= base;
    frac *= inv_base;
  }
  return result;
}

Vec halton_point(std::uint64_t index, int dim, std::uint64_t seed) {
  // A per-seed leap keeps streams with different seeds disjoint.
  std::uint64_t off = 101 + (seed % 1000003) * 7919;
  Vec p(dim);
  for (int i = 0; i < dim; ++i) {
    int base = kPrimes[i % kNumPrimes];
    p(i) = radical_inverse(index + off, base);
    if (p(i) <= 0.0) p(i) = 0.5 / base;
  }
  return p;
}

Vec sphere_point(std::uint64_t index, int dim, std::uint64_t seed) {
  if (dim == 1) {
    // Alternate the two directions.
    Vec v(1);
    v(0) = ((index + seed) % 2 == 0) ? 1.0 : -1.0;
    return v;
  }
  int pairs = (dim + 1) / 2;
  Vec g(2 * pairs);
  Vec u = halton_point(index, 2 * pairs, seed);
  for (int i = 0; i < pairs; ++i) {
    g(2 * i) = box_muller(u(2 * i), u(2 * i + 1), false);
    g(2 * i + 1) = box_muller(u(2 * i), u(2 * i + 1), true);
  }
  Vec v = g.head(dim);
  double n = v.norm();
  if (n < 1e-12) {
    v.setZero();
    v(0) = 1.0;
    return v;
  }
  return v / n;
}

Vec ball_point(std::uint64_t index, int dim, std::uint64_t seed) {
  Vec dir = sphere_point(index, dim, seed);
  double u = radical_inverse(index + 101 + (seed % 1000003) * 7919,
                             kPrimes[(2 * ((dim + 1) / 2)) % kNumPrimes]);
  double r = std::pow(u, 1.0 / dim);
  return r * dir;
}

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  if (threads <= 1 || n == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  int nw = std::min(threads, n);
  std::vector<std::thread> pool;
  pool.reserve(nw);
  for (int t = 0; t < nw; ++t) {
    pool.emplace_back([&, t]() {
      for (int i = t; i < n; i += nw) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace soccp
