#pragma once

// Seeded random streams. Every independent unit of work (episode, trial,
// sampled matrix) draws from its own stream keyed by (seed, index), so
// results do not depend on how the work is split across threads.

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace obsplan {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Generator for work item `index` under `seed`.
inline Rng stream(std::uint64_t seed, std::uint64_t index) {
  const std::uint64_t a = splitmix64(seed);
  const std::uint64_t b = splitmix64(a ^ splitmix64(index + 0x632be59bd9b4e019ULL));
  std::seed_seq seq{static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32)};
  return Rng(seq);
}

/// Uniform double in [0, 1). Uses the top 53 bits; std::uniform_real_distribution
/// is not pinned across standard libraries.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Uniform integer in [0, n).
inline int uniform_index(Rng& rng, int n) {
  return static_cast<int>(uniform01(rng) * n) % n;
}

/// Index drawn from a discrete distribution by inverse CDF in ascending order.
inline int sample_discrete(Rng& rng, std::span<const double> probs) {
  const double u = uniform01(rng);
  double acc = 0.0;
  int last_positive = 0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    if (probs[k] <= 0.0) continue;
    acc += probs[k];
    last_positive = static_cast<int>(k);
    if (u < acc) return last_positive;
  }
  return last_positive;
}

/// Dirichlet(alpha, ..., alpha) sample of length n.
inline std::vector<double> dirichlet(Rng& rng, int n, double alpha = 1.0) {
  std::gamma_distribution<double> g(alpha, 1.0);
  std::vector<double> out(n);
  double sum = 0.0;
  for (int k = 0; k < n; ++k) {
    out[k] = g(rng);
    sum += out[k];
  }
  if (sum <= 0.0) {
    out.assign(n, 1.0 / n);
    return out;
  }
  for (double& v : out) v /= sum;
  return out;
}

}  // namespace obsplan
