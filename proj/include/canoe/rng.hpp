// Copyright 2026 The canoe-lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace canoe {

/// Seedable generator with deterministic child streams. Children are keyed by
/// (parent seed, index) through SplitMix64, so a stream never depends on how
/// many draws its siblings made.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(mix(seed)) {}

  std::uint64_t seed() const noexcept { return seed_; }
  Rng split(std::uint64_t index) const { return Rng(mix(seed_ ^ mix(index + 0x9e3779b97f4a7c15ULL))); }

  std::mt19937_64& engine() noexcept { return engine_; }

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
  std::complex<double> complex_normal() {
    const double s = 1.0 / std::sqrt(2.0);
    const double re = normal();
    const double im = normal();
    return {s * re, s * im};
  }
  std::uint64_t below(std::uint64_t n) {
    return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_);
  }
  std::uint64_t binomial(std::uint64_t n, double p) {
    if (n == 0 || p <= 0.0) return 0;
    if (p >= 1.0) return n;
    return std::binomial_distribution<std::uint64_t>(n, p)(engine_);
  }

  /// Multinomial draw by sequential conditional binomials. Probabilities need
  /// not be normalized; their sum is taken as the total mass.
  std::vector<std::uint64_t> multinomial(std::uint64_t n, std::span<const double> probs) {
    std::vector<std::uint64_t> out(probs.size(), 0);
    double remaining_mass = 0.0;
    for (double p : probs) remaining_mass += p;
    std::uint64_t remaining = n;
    for (std::size_t i = 0; i < probs.size() && remaining > 0; ++i) {
      if (i + 1 == probs.size()) {
        out[i] = remaining;
        break;
      }
      const double q = remaining_mass > 0.0 ? probs[i] / remaining_mass : 0.0;
      out[i] = binomial(remaining, q);
      remaining -= out[i];
      remaining_mass -= probs[i];
    }
    return out;
  }

  static std::uint64_t mix(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace canoe
