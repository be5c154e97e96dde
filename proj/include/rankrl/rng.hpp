#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace rankrl {

// std::mt19937_64 output is pinned by the standard, so the engine is
// portable. The std:: distributions are not; the helpers below replace
// them so that seeded runs produce identical bytes everywhere.
using Rng = std::mt19937_64;

// Unbiased integer in [0, n). Rejection sampling on raw engine output.
inline uint64_t uniform_below(Rng& rng, uint64_t n) {
  if (n == 0) return 0;
  const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

// Uniform double in [0, 1) with 53 random bits.
inline double uniform_unit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Standard normal via Box-Muller. Consumes two engine outputs per call;
// the second transform output is discarded to keep the draw count fixed.
inline double standard_normal(Rng& rng) {
  double u1 = (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
  double u2 = uniform_unit(rng);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

// In-place Fisher-Yates using uniform_below.
template <typename T>
void shuffle_portable(std::vector<T>& v, Rng& rng) {
  for (size_t i = v.size(); i > 1; --i) {
    size_t j = static_cast<size_t>(uniform_below(rng, i));
    std::swap(v[i - 1], v[j]);
  }
}

// k distinct indices drawn uniformly from 0..n-1, in draw order.
inline std::vector<size_t> sample_without_replacement(Rng& rng, size_t n,
                                                      size_t k) {
  std::vector<size_t> pool(n);
  for (size_t i = 0; i < n; ++i) pool[i] = i;
  std::vector<size_t> out;
  out.reserve(k);
  for (size_t i = 0; i < k && i < n; ++i) {
    size_t j = i + static_cast<size_t>(uniform_below(rng, n - i));
    std::swap(pool[i], pool[j]);
    out.push_back(pool[i]);
  }
  return out;
}

}  // namespace rankrl
