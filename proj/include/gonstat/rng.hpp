// Copyright 2026 The GonStat Authors
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

#ifndef GONSTAT_RNG_HPP
#define GONSTAT_RNG_HPP

#include <cmath>
#include <cstdint>

namespace gonstat {

// SplitMix64 (Steele, Lea & Flood, OOPSLA 2014).  The single generator used
// for every seeded computation in the toolkit.  std::* engines and
// distributions are deliberately avoided: their streams are
// implementation-defined, and reports must be byte-identical across
// platforms and across serial/parallel execution.
class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53-bit resolution.
  double next_double() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  // Unbiased uniform integer in [0, n), n >= 1, by rejection.
  uint64_t next_below(uint64_t n) {
    uint64_t threshold = (0 - n) % n;  // 2^64 mod n
    for (;;) {
      uint64_t r = next();
      if (r >= threshold) return r % n;
    }
  }

  bool next_bool() { return (next() >> 63) != 0; }

  static uint64_t mix(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Substream k of a run seed.  Resample k of a bootstrap always consumes
  // substream k, so a parallel schedule reproduces the serial stream.
  static SplitMix64 substream(uint64_t seed, uint64_t k) {
    return SplitMix64(mix(seed + (k + 1) * 0x9e3779b97f4a7c15ull));
  }

 private:
  uint64_t state_;
};

// Standard normal via Box-Muller.  Consumes exactly two uniforms.
inline double sample_normal(SplitMix64& g) {
  double u1 = g.next_double();
  double u2 = g.next_double();
  // Guard the log against u1 == 0.
  if (u1 <= 0) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

// Gamma(shape, 1) by Marsaglia & Tsang (2000); shape < 1 handled with the
// standard power boost.
inline double sample_gamma(SplitMix64& g, double shape) {
  if (shape < 1.0) {
    double u = g.next_double();
    if (u <= 0) u = 0x1.0p-53;
    return sample_gamma(g, shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  double d = shape - 1.0 / 3.0;
  double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = sample_normal(g);
    double v = 1.0 + c * x;
    if (v <= 0) continue;
    v = v * v * v;
    double u = g.next_double();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (u <= 0) u = 0x1.0p-53;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

inline double sample_beta(SplitMix64& g, double a, double b) {
  double x = sample_gamma(g, a);
  double y = sample_gamma(g, b);
  return x / (x + y);
}

}  // namespace gonstat

#endif  // GONSTAT_RNG_HPP
