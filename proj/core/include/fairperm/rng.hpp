/*
 * Copyright 2026 Fairperm Contributors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace fairperm {

/// Role of a derived random stream. Streams for distinct purposes are
/// independent even at the same (master_seed, trial_index).
enum class StreamPurpose : std::uint64_t {
  permute = 1,
  bootstrap = 2,
  trial_bootstrap = 3,
  dataset = 4,
  test_seed = 5,
  sweep = 6,
};

/// SplitMix64 finalizer; full-avalanche mix of a 64-bit word.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

/// Pure function of (master_seed, trial_index, purpose); no coordination
/// between trials is needed to obtain independent streams.
constexpr std::uint64_t derive_seed(std::uint64_t master_seed,
                                    std::uint64_t trial_index,
                                    StreamPurpose purpose) noexcept {
  std::uint64_t s =
      mix64(master_seed + 0x9E3779B97F4A7C15ULL *
                              (static_cast<std::uint64_t>(purpose) + 1));
  return mix64(s ^ mix64(trial_index + 0xE7037ED1A0B428DBULL));
}

/// Reproducible random stream: xoshiro256++ seeded by splitmix64 state
/// expansion. The generator and every distribution are implemented here, so
/// draws are bit-identical across toolchains and platforms.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& word : state_) {
      x += 0x9E3779B97F4A7C15ULL;
      word = mix64(x);
    }
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform integer in [0, bound), unbiased (Lemire multiply-shift with
  /// rejection of the short leading interval).
  std::uint64_t uniform_below(std::uint64_t bound) {
    std::uint64_t x = next_u64();
    unsigned __int128 m = static_cast<unsigned __int128>(x) * bound;
    std::uint64_t low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        x = next_u64();
        m = static_cast<unsigned __int128>(x) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Uniform real in [0, 1) with 53-bit resolution.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform real in (0, 1]; safe as a log() argument.
  double uniform01_open_left() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Standard normal via Box-Muller (no state carried between calls).
  double normal() {
    const double u1 = uniform01_open_left();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  /// Standard exponential via inversion.
  double exponential() { return -std::log(uniform01_open_left()); }

  bool bernoulli(double p) { return uniform01() < p; }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t v, int k) noexcept {
    return (v << k) | (v >> (64 - k));
  }

  std::array<std::uint64_t, 4> state_{};
};

/// The replicate-stream factory: independent, reproducible streams keyed by
/// (master_seed, trial_index, purpose).
inline RngStream rng_stream(std::uint64_t master_seed,
                            std::uint64_t trial_index, StreamPurpose purpose) {
  return RngStream(derive_seed(master_seed, trial_index, purpose));
}

}  // namespace fairperm
