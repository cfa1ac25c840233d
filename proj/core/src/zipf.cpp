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

#include "shardplan/zipf.hpp"

#include <algorithm>
#include <cmath>

#include "shardplan/error.hpp"

namespace shardplan {
namespace {

// log1p(x)/x, stable near zero.
double helper1(double x) {
  if (std::fabs(x) > 1e-8) return std::log1p(x) / x;
  return 1.0 - x * (0.5 - x * (1.0 / 3.0 - x * 0.25));
}

// expm1(x)/x, stable near zero.
double helper2(double x) {
  if (std::fabs(x) > 1e-8) return std::expm1(x) / x;
  return 1.0 + x * 0.5 * (1.0 + x * (1.0 / 3.0) * (1.0 + x * 0.25));
}

}  // namespace

ZipfSampler::ZipfSampler(uint64_t num_values, double exponent)
    : num_values_(num_values), exponent_(exponent) {
  if (num_values == 0) throw InvalidArgument("zipf: num_values must be >= 1");
  if (!(exponent >= 0.0))
    throw InvalidArgument("zipf: exponent must be >= 0");
  h_integral_x1_ = h_integral(1.5) - 1.0;
  h_integral_n_ = h_integral(static_cast<double>(num_values) + 0.5);
  threshold_ = 2.0 - h_integral_inverse(h_integral(2.5) - h(2.0));
}

// Antiderivative H of x^-exponent with H(1) chosen so that the expansion is
// continuous across exponent = 1.
double ZipfSampler::h_integral(double x) const {
  double log_x = std::log(x);
  return helper2((1.0 - exponent_) * log_x) * log_x;
}

double ZipfSampler::h(double x) const {
  return std::exp(-exponent_ * std::log(x));
}

double ZipfSampler::h_integral_inverse(double x) const {
  double t = x * (1.0 - exponent_);
  if (t < -1.0) t = -1.0;  // numerical guard near the lower tail
  return std::exp(helper1(t) * x);
}

uint64_t ZipfSampler::operator()(SplitMix64& rng) const {
  if (num_values_ == 1) return 0;
  while (true) {
    double u =
        h_integral_n_ + rng.next_double() * (h_integral_x1_ - h_integral_n_);
    double x = h_integral_inverse(u);
    double nd = static_cast<double>(num_values_);
    double kd = std::clamp(std::floor(x + 0.5), 1.0, nd);
    uint64_t k = static_cast<uint64_t>(kd);
    if (kd - x <= threshold_ ||
        u >= h_integral(kd + 0.5) - h(kd)) {
      return k - 1;
    }
  }
}

}  // namespace shardplan
