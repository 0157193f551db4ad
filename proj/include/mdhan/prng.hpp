/*
 * Copyright 2026 the mdhan authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef MDHAN_PRNG_HPP
#define MDHAN_PRNG_HPP

#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

// All randomness in the project flows through mt19937_64 engines whose seeds
// are derived from a single run seed via splitmix64. Substreams are keyed by
// a tag string plus an index, so independent components (corpus synthesis,
// LDA chains, parameter init, per-user dropout) draw from non-overlapping,
// order-independent streams. mt19937_64 output is identical across platforms,
// which is what the bitwise-reproducibility invariants rely on.

namespace mdhan {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// FNV-1a: stable across platforms, unlike std::hash.
inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag,
                                 std::uint64_t index = 0) {
  return splitmix64(splitmix64(seed ^ fnv1a64(tag)) ^ index);
}

inline std::mt19937_64 make_engine(std::uint64_t seed, std::string_view tag,
                                   std::uint64_t index = 0) {
  return std::mt19937_64(derive_seed(seed, tag, index));
}

// The std:: distributions have implementation-defined algorithms, so anything
// that must be byte-reproducible across standard libraries uses the pinned
// draws below instead.

// Uniform in [0, 1) with 53 bits of precision.
inline double uniform_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n). Rejection sampling, no modulo bias.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = n * ((~std::uint64_t{0}) / n);
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

// Inclusive integer range.
inline std::int64_t uniform_range(std::mt19937_64& rng, std::int64_t lo,
                                  std::int64_t hi) {
  return lo + static_cast<std::int64_t>(
                  uniform_below(rng, static_cast<std::uint64_t>(hi - lo + 1)));
}

// Fisher-Yates with pinned index draws (std::shuffle is not portable).
template <typename T>
void shuffle_vec(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[uniform_below(rng, i)]);
  }
}

}  // namespace mdhan

#endif  // MDHAN_PRNG_HPP
