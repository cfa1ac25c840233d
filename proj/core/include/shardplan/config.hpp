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

#include <optional>
#include <string>
#include <vector>

#include "shardplan/types.hpp"
#include "shardplan/workload.hpp"

namespace shardplan {

/// Parsed run configuration (INI-style sections; see docs/formats.md and
/// the bundled configs under configs/).
struct RunConfig {
  // [workload]
  std::vector<WorkloadSpec> workload;
  uint64_t num_samples = 0;
  uint64_t workload_seed = 1;
  std::string trace_path;  // pre-generated trace instead of a generator spec
  bool compress = false;

  // [system]
  SystemSpec system;

  // [planner]
  std::string strategy = "milp";  // milp | greedy | ldm
  std::optional<std::string> cost;  // size | lookup | size-lookup
  Ablation ablation;
  uint32_t step_count = 100;
  double time_limit_s = 60.0;

  // [profiling]
  double sample_rate = 1.0;
  uint64_t profile_seed = 7;

  // [output]
  std::string out_dir = "out";

  // FNV-1a over the raw config bytes; stamped into artifact headers.
  std::string config_hash;
};

RunConfig parse_config(const std::string& path);

/// 64-bit FNV-1a, hex encoded.
std::string fnv1a_hex(const std::string& bytes);

/// Bytes with an optional KB/MB/GB (binary) suffix, e.g. "24GB".
uint64_t parse_bytes(const std::string& text);

}  // namespace shardplan
