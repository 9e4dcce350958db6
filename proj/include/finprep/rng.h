// Copyright 2026 The finprep Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FINPREP_RNG_H_
#define FINPREP_RNG_H_

#include <cstdint>
#include <span>
#include <string_view>

namespace finprep {

// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// 64-bit FNV-1a.
constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

// Builds a stream key from a root seed and an ordered list of components.
// Equal component sequences give equal keys on every platform.
class StreamKey {
 public:
  explicit constexpr StreamKey(std::uint64_t seed) : state_(mix64(seed)) {}

  constexpr StreamKey& add(std::uint64_t v) {
    state_ = mix64(state_ ^ mix64(v + 0x632BE59BD9B4E019ULL));
    return *this;
  }
  constexpr StreamKey& add(std::string_view s) { return add(fnv1a64(s)); }

  constexpr std::uint64_t value() const { return state_; }

 private:
  std::uint64_t state_;
};

// xoshiro256** seeded through SplitMix64. The output sequence and the
// derived draws below are fully specified, unlike <random> distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  explicit Rng(const StreamKey& key) : Rng(key.value()) {}

  std::uint64_t next_u64();

  // Uniform in [0, 1) with 53 bits of precision.
  double next_double();

  // Uniform in [0, bound). bound must be positive.
  std::uint64_t next_below(std::uint64_t bound);

  // Index drawn with probability proportional to weights[i].
  std::size_t next_weighted(std::span<const double> weights);

 private:
  std::uint64_t s_[4];
};

// Fisher-Yates shuffle driven by Rng.
template <typename T>
void shuffle(std::span<T> items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.next_below(i));
    using std::swap;
    swap(items[i - 1], items[j]);
  }
}

}  // namespace finprep

#endif  // FINPREP_RNG_H_
