// Copyright (c) 2026 the hifinet authors
// SPDX-License-Identifier: Apache-2.0
//
// Deterministic random number generation. All draws go through this wrapper
// (never std distributions, whose output is implementation-defined) so that
// identical seeds give identical streams on every platform.

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace hifinet {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (cosine branch only, stream-stable).
  double normal() {
    double u1 = 1.0 - uniform();  // (0, 1]
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  /// Uniform integer in [0, n), n >= 1.
  int below(int n) {
    return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n));
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(static_cast<int>(i)));
      std::swap(v[i - 1], v[j]);
    }
  }

  /// Stable derived seed for sub-streams (per trial / per sweep cell).
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace hifinet
