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

#include "shardplan/rng.hpp"

namespace shardplan {

/// Bounded Zipf sampler over {0, ..., num_values - 1} with
/// p(k) proportional to (k + 1)^-exponent.
///
/// Uses Hormann & Derflinger rejection-inversion, so construction is O(1)
/// and no table proportional to num_values is ever built; cardinalities in
/// the billions are fine. exponent = 0 degenerates to the uniform
/// distribution, exponent = 1 is handled without special casing through the
/// series expansions of the h helpers.
class ZipfSampler {
 public:
  ZipfSampler(uint64_t num_values, double exponent);

  uint64_t operator()(SplitMix64& rng) const;

  uint64_t num_values() const { return num_values_; }
  double exponent() const { return exponent_; }

 private:
  double h_integral(double x) const;
  double h(double x) const;
  double h_integral_inverse(double x) const;

  uint64_t num_values_;
  double exponent_;
  double h_integral_x1_;
  double h_integral_n_;
  double threshold_;
};

}  // namespace shardplan
