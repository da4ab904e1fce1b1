#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace nerh {

// std::shuffle and the standard distributions are implementation-defined, so
// the same seed would give different orders on different standard libraries.
// Everything random in this codebase goes through the helpers below, which
// are pinned to the (fully specified) raw mt19937_64 stream.

inline std::uint64_t bounded_rand(std::mt19937_64& g, std::uint64_t n) {
  return n == 0 ? 0 : g() % n;
}

template <class T>
inline void deterministic_shuffle(std::vector<T>& v, std::mt19937_64& g) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(bounded_rand(g, i));
    std::swap(v[i - 1], v[j]);
  }
}

// First k elements of a deterministic shuffle of v; k is clamped to v.size().
template <class T>
inline std::vector<T> sample_without_replacement(const std::vector<T>& v, std::size_t k,
                                                 std::mt19937_64& g) {
  std::vector<T> pool = v;
  deterministic_shuffle(pool, g);
  if (k < pool.size()) pool.resize(k);
  return pool;
}

}  // namespace nerh
