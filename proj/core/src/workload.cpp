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

#include "shardplan/workload.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "shardplan/zipf.hpp"

namespace shardplan {

const char* to_string(PoolingLaw law) {
  switch (law) {
    case PoolingLaw::kConstant: return "constant";
    case PoolingLaw::kPoisson: return "poisson";
    case PoolingLaw::kLognormal: return "lognormal";
  }
  return "?";
}

PoolingLaw pooling_law_from_string(const std::string& s) {
  if (s == "constant") return PoolingLaw::kConstant;
  if (s == "poisson") return PoolingLaw::kPoisson;
  if (s == "lognormal") return PoolingLaw::kLognormal;
  throw InvalidArgument("unknown pooling law: " + s);
}

const char* to_string(const Ablation& a) {
  if (a.use_pooling && a.use_coverage) return "full";
  if (a.use_pooling) return "cdf+pooling";
  if (a.use_coverage) return "cdf+coverage";
  return "cdf";
}

Ablation ablation_from_string(const std::string& s) {
  if (s == "full") return {true, true};
  if (s == "cdf+pooling") return {true, false};
  if (s == "cdf+coverage") return {false, true};
  if (s == "cdf") return {false, false};
  throw InvalidArgument("unknown ablation: " + s);
}

double normal_draw(SplitMix64& rng) {
  double u1 = rng.next_double_open();
  double u2 = rng.next_double();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

uint64_t poisson_draw(SplitMix64& rng, double mean) {
  if (mean <= 0.0) return 0;
  if (mean < 30.0) {
    // Knuth product-of-uniforms.
    double limit = std::exp(-mean);
    uint64_t k = 0;
    double p = rng.next_double_open();
    while (p > limit) {
      ++k;
      p *= rng.next_double_open();
    }
    return k;
  }
  // Hormann's transformed rejection (PTRS).
  double b = 0.931 + 2.53 * std::sqrt(mean);
  double a = -0.059 + 0.02483 * b;
  double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  double v_r = 0.9277 - 3.6224 / (b - 2.0);
  while (true) {
    double u = rng.next_double() - 0.5;
    double v = rng.next_double_open();
    double us = 0.5 - std::fabs(u);
    double kd = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= v_r) return static_cast<uint64_t>(kd);
    if (kd < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
        kd * std::log(mean) - mean - std::lgamma(kd + 1.0)) {
      return static_cast<uint64_t>(kd);
    }
  }
}

namespace {

// Mean of max(1, llround(exp(mu + sigma * Z))) for standard normal Z.
double discretized_lognormal_mean(double mu, double sigma) {
  auto upper_cdf = [&](double x) {
    // P(X > x) for lognormal X.
    return 0.5 * std::erfc((std::log(x) - mu) / (sigma * 1.4142135623730951));
  };
  // E[K] = 1 + sum_{k>=1} P(K > k) with K = max(1, round(X)):
  // P(K > k) = P(X > k + 0.5).
  double mean = 1.0;
  double k = 1.0;
  while (true) {
    double tail = upper_cdf(k + 0.5);
    mean += tail;
    if (tail < 1e-13 && k > std::exp(mu)) break;
    k += 1.0;
    if (k > 1e7) break;  // runaway guard; means this large are not used
  }
  return mean;
}

double calibrate_lognormal_mu(double target_mean, double sigma) {
  double lo = -20.0;
  double hi = std::log(target_mean + 1.0) + 2.0;
  while (discretized_lognormal_mean(hi, sigma) < target_mean) hi += 1.0;
  for (int it = 0; it < 80; ++it) {
    double mid = 0.5 * (lo + hi);
    if (discretized_lognormal_mean(mid, sigma) < target_mean)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

PoolingSampler::PoolingSampler(PoolingLaw law, double mean)
    : law_(law), mean_(mean) {
  if (!(mean >= 1.0))
    throw InvalidArgument("pooling sampler: mean must be >= 1");
  switch (law_) {
    case PoolingLaw::kConstant:
      break;
    case PoolingLaw::kPoisson:
      lambda_ = mean - 1.0;
      break;
    case PoolingLaw::kLognormal:
      sigma_ = 0.75;
      mu_ = calibrate_lognormal_mu(mean, sigma_);
      break;
  }
}

uint32_t PoolingSampler::operator()(SplitMix64& rng) const {
  switch (law_) {
    case PoolingLaw::kConstant:
      return static_cast<uint32_t>(std::max<int64_t>(1, std::llround(mean_)));
    case PoolingLaw::kPoisson:
      return static_cast<uint32_t>(1 + poisson_draw(rng, lambda_));
    case PoolingLaw::kLognormal: {
      double x = std::exp(mu_ + sigma_ * normal_draw(rng));
      int64_t k = std::llround(x);
      return static_cast<uint32_t>(std::max<int64_t>(1, k));
    }
  }
  return 1;
}

Trace generate_trace_range(const std::vector<WorkloadSpec>& specs,
                           uint64_t first, uint64_t count,
                           uint64_t num_samples_total, uint64_t seed,
                           GenStats* gen_stats) {
  if (specs.empty())
    throw InvalidArgument("generate_trace: spec list must be nonempty");
  if (num_samples_total < 1)
    throw InvalidArgument("generate_trace: num_samples must be >= 1");
  for (size_t j = 0; j < specs.size(); ++j) {
    validate(specs[j].table);
    validate(specs[j].gen, specs[j].table.table_id);
    if (j > 0 && specs[j].table.table_id <= specs[j - 1].table.table_id)
      throw InvalidArgument(
          "generate_trace: table ids must be strictly increasing");
  }

  Trace trace;
  trace.num_samples = num_samples_total;
  trace.tables.reserve(specs.size());
  for (const auto& ws : specs) trace.tables.push_back(ws.table);

  std::vector<ZipfSampler> zipf;
  std::vector<PoolingSampler> pooling;
  zipf.reserve(specs.size());
  pooling.reserve(specs.size());
  for (const auto& ws : specs) {
    zipf.emplace_back(ws.table.cardinality, ws.gen.zipf_exponent);
    pooling.emplace_back(ws.gen.pooling_law,
                         ws.gen.coverage > 0.0 ? ws.gen.mean_pooling : 1.0);
  }

  std::vector<std::unordered_set<uint64_t>> raw_seen;
  if (gen_stats) raw_seen.resize(specs.size());

  for (uint64_t s = first; s < first + count; ++s) {
    for (size_t j = 0; j < specs.size(); ++j) {
      const auto& ws = specs[j];
      SplitMix64 rng(derive_stream(seed, s, ws.table.table_id));
      if (ws.gen.coverage <= 0.0 || rng.next_double() >= ws.gen.coverage)
        continue;
      uint32_t k = pooling[j](rng);
      Trace::Record rec;
      rec.sample = s;
      rec.table = ws.table.table_id;
      rec.offset = trace.ids.size();
      rec.len = k;
      for (uint32_t i = 0; i < k; ++i) {
        uint64_t raw = zipf[j](rng);
        if (gen_stats) raw_seen[j].insert(raw);
        trace.ids.push_back(hash_value(raw, ws.table.hash_size));
      }
      trace.records.push_back(rec);
    }
  }

  if (gen_stats) {
    gen_stats->distinct_raw_ids.resize(specs.size());
    for (size_t j = 0; j < specs.size(); ++j)
      gen_stats->distinct_raw_ids[j] = raw_seen[j].size();
  }
  return trace;
}

Trace generate_trace(const std::vector<WorkloadSpec>& specs,
                     uint64_t num_samples, uint64_t seed, GenStats* gen_stats) {
  return generate_trace_range(specs, 0, num_samples, num_samples, seed,
                              gen_stats);
}

}  // namespace shardplan
