#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace locavqg {

// mt19937_64 produces an implementation-independent bit stream; the helpers
// below avoid std distributions, whose output is implementation-defined.
using Rng = std::mt19937_64;

inline uint64_t rng_u64(Rng& rng) { return rng(); }

// Uniform in [0, n) via rejection sampling (unbiased, portable).
inline size_t rng_index(Rng& rng, size_t n) {
  if (n == 0) return 0;
  uint64_t bound = UINT64_MAX - UINT64_MAX % n;
  uint64_t v;
  do { v = rng(); } while (v >= bound);
  return static_cast<size_t>(v % n);
}

// Uniform double in [0, 1) with 53 bits of randomness.
inline double rng_double(Rng& rng) {
  return (rng() >> 11) * (1.0 / 9007199254740992.0);
}

// Normal(0, 1) via Box-Muller (portable across standard libraries).
inline double rng_normal(Rng& rng) {
  double u1 = rng_double(rng);
  double u2 = rng_double(rng);
  if (u1 < 1e-300) u1 = 1e-300;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

template <typename T>
void rng_shuffle(Rng& rng, std::vector<T>& v) {
  for (size_t i = v.size(); i > 1; --i) {
    size_t j = rng_index(rng, i);
    std::swap(v[i - 1], v[j]);
  }
}

// First k elements of a seeded permutation of [0, n).
inline std::vector<size_t> rng_sample_indices(Rng& rng, size_t n, size_t k) {
  std::vector<size_t> idx(n);
  for (size_t i = 0; i < n; ++i) idx[i] = i;
  rng_shuffle(rng, idx);
  if (k < n) idx.resize(k);
  return idx;
}

}  // namespace locavqg
