// Copyright 2026 The MapsTP Authors
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

#ifndef MAPSTP__RNG_HPP_
#define MAPSTP__RNG_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>

namespace mapstp
{

/// SplitMix64 finalizer. Used for seeding and as the documented scene hash.
constexpr std::uint64_t splitmix64(std::uint64_t & state) noexcept
{
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Stateless hash of a single value: one SplitMix64 step from `value`.
constexpr std::uint64_t hash64(std::uint64_t value) noexcept
{
  std::uint64_t s = value;
  return splitmix64(s);
}

/**
 * xoshiro256** 1.0 (Blackman & Vigna), state seeded by four SplitMix64 draws.
 *
 * Every derived quantity uses only integer ops and exact double scaling, so a
 * port that follows the same recipe reproduces the same stream:
 *   - uniform():      (next() >> 11) * 2^-53, in [0, 1)
 *   - uniform_int(n): high 64 bits of next() * n (128-bit product)
 *   - normal():       Box-Muller on two uniform() draws, cosine branch only
 */
class Rng
{
public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) noexcept
  {
    std::uint64_t sm = seed;
    for (auto & s : state_) {
      s = splitmix64(sm);
    }
  }

  /// Raw state, for checking published reference vectors.
  static Rng from_state(const std::array<std::uint64_t, 4> & state) noexcept
  {
    Rng r(0);
    for (std::size_t i = 0; i < 4; ++i) {
      r.state_[i] = state[i];
    }
    return r;
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  result_type operator()() noexcept { return next(); }

  std::uint64_t next() noexcept
  {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  std::uint64_t uniform_int(std::uint64_t n) noexcept
  {
    const unsigned __int128 product = static_cast<unsigned __int128>(next()) * n;
    return static_cast<std::uint64_t>(product >> 64);
  }

  bool bernoulli(double p) noexcept { return uniform() < p; }

  double normal() noexcept;

  /// Index drawn with probability proportional to `weights` (all >= 0).
  std::size_t categorical(std::span<const double> weights) noexcept;

  /// Fisher-Yates, walking from the back. std::shuffle is not portable.
  template <typename T>
  void shuffle(std::span<T> items) noexcept
  {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_int(i));
      std::swap(items[i - 1], items[j]);
    }
  }

private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept
  {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4]{};
};

}  // namespace mapstp

#endif  // MAPSTP__RNG_HPP_
