#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace dqa {

// splitmix64 finalizer. Used for counter-based seed derivation so that every
// tree/fold/repetition gets an independent, reproducible stream.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t counter) {
  return splitmix64(base + counter * 0x9E3779B97F4A7C15ull);
}

// Context salts keep unrelated consumers of the same user seed on
// non-overlapping counters.
inline constexpr std::uint64_t kSeedTrees = 0x100000000ull;
inline constexpr std::uint64_t kSeedFolds = 0x200000000ull;
inline constexpr std::uint64_t kSeedBaseline = 0x300000000ull;
inline constexpr std::uint64_t kSeedCvForest = 0x400000000ull;
inline constexpr std::uint64_t kSeedSampling = 0x500000000ull;

using Rng = std::mt19937_64;

// Unbiased integer in [0, n). std:: distributions are implementation-defined,
// so sampling is hand-rolled to keep identical seeds reproducible everywhere.
inline std::uint64_t bounded(Rng& rng, std::uint64_t n) {
  if (n <= 1) return 0;
  const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
  const std::uint64_t limit = max - max % n;
  std::uint64_t x = rng();
  while (x >= limit) x = rng();
  return x % n;
}

template <typename T>
void shuffle_inplace(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(bounded(rng, i));
    std::swap(v[i - 1], v[j]);
  }
}

// First k entries of a seeded permutation of [0, n).
inline std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  if (k > n) k = n;
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i + static_cast<std::size_t>(bounded(rng, n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  return idx;
}

}  // namespace dqa
