// Copyright 2026 The shardplan authors
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

#include <cstdint>

namespace shardplan {

// SplitMix64 finalizer (Steele/Lea/Flood via Vigna's public-domain
// reference). The three constants below are the published ones and must
// not change: hashed traces are required to be reproducible across
// platforms and releases.
inline constexpr uint64_t kSplitMix64Gamma = 0x9E3779B97F4A7C15ULL;

inline uint64_t mix64(uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// 64-bit SplitMix64 stream. Small, fast, and identical on every platform.
class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    state_ += kSplitMix64Gamma;
    return mix64(state_);
  }

  /// Uniform double in [0, 1).
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform double in (0, 1); safe as a log() argument.
  double next_double_open() {
    return (static_cast<double>(next() >> 12) + 0.5) * 0x1.0p-52;
  }

  /// Uniform integer in [0, n). Modulo bias is below 2^-32 for n < 2^32.
  uint64_t next_below(uint64_t n) { return next() % n; }

 private:
  uint64_t state_;
};

/// Derives an independent substream seed from a master seed and two stream
/// coordinates (e.g. sample id and table id). Generation parallelized over
/// disjoint coordinate ranges produces output identical to a sequential run.
inline uint64_t derive_stream(uint64_t master, uint64_t a, uint64_t b) {
  uint64_t s = mix64(master ^ (kSplitMix64Gamma * (a + 1)));
  return mix64(s ^ (0xD1B54A32D192ED03ULL * (b + 1)));
}

}  // namespace shardplan
