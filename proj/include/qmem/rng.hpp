// Copyright 2026 The qmemsim Authors
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

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

#include <Eigen/Dense>

namespace qmem {

/// Small counter-scramble generator (splitmix64). One instance per Monte
/// Carlo trial gives an independent, reproducible stream with O(1) setup,
/// which keeps trial generation embarrassingly parallel: stream identity
/// depends only on (seed, trial index), never on execution order.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t state) : state_(state) {}

  /// Stream for trial `index` of a run seeded with `seed`.
  static Rng for_trial(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t h = seed ^ (0x9E3779B97F4A7C15ULL + (seed << 6) + (seed >> 2));
    h ^= index * 0xBF58476D1CE4E5B9ULL + 0x94D049BB133111EBULL;
    Rng r(h);
    r();  // decorrelate nearby (seed, index) pairs
    return r;
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// Uniform double in [0, 1).
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform double in (0, 1].
inline double uniform01_open_low(Rng& rng) { return 1.0 - uniform01(rng); }

/// Standard normal via Box-Muller. Two uniforms per call; no cached state,
/// so draw counts per trial stay fixed and reproducible.
inline double normal01(Rng& rng) {
  double u1 = uniform01_open_low(rng);
  double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

/// Uniform point on the unit sphere.
inline Eigen::Vector3d random_unit_vector(Rng& rng) {
  double z = 2.0 * uniform01(rng) - 1.0;
  double phi = 2.0 * M_PI * uniform01(rng);
  double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {r * std::cos(phi), r * std::sin(phi), z};
}

}  // namespace qmem
