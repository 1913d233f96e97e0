// Copyright 2026 The qwalk Authors
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
#include <cstdint>
#include <numbers>
#include <random>
#include <utility>

namespace qwalk {

/// SplitMix64 finalizer.  Bijective on 64-bit words, so distinct inputs give
/// distinct stream seeds.
inline constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

/// Seed of the per-index substream derived from a master seed.  This mixing
/// function is part of the reproducibility contract and is echoed in report
/// metadata: stream_seed(master, i) = splitmix64(master + (i+1)*kGoldenGamma).
inline constexpr std::uint64_t stream_seed(std::uint64_t master,
                                           std::uint64_t index) {
  return splitmix64(master + (index + 1) * kGoldenGamma);
}

/// Uniform draw in [0, 1) built from the top 53 bits of the engine output.
/// Avoids std::uniform_real_distribution so that the stream is reproducible
/// across standard library implementations.
template <typename Scalar = double, typename Rng>
Scalar uniform01(Rng& rng) {
  return static_cast<Scalar>((rng() >> 11) * 0x1.0p-53);
}

/// Pair of independent standard normals (Box-Muller on uniform01 draws).
template <typename Scalar = double, typename Rng>
std::pair<Scalar, Scalar> normal_pair(Rng& rng) {
  const Scalar u1 = Scalar(1) - uniform01<Scalar>(rng);  // (0, 1]
  const Scalar u2 = uniform01<Scalar>(rng);
  const Scalar rad = std::sqrt(Scalar(-2) * std::log(u1));
  const Scalar ang = Scalar(2) * std::numbers::pi_v<Scalar> * u2;
  return {rad * std::cos(ang), rad * std::sin(ang)};
}

}  // namespace qwalk
