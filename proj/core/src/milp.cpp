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

#include "shardplan/milp.hpp"

#include <unordered_map>

namespace shardplan {

MilpInstance build_instance(const std::vector<FeatureStats>& stats,
                            const std::vector<TableSpec>& specs,
                            const SystemSpec& system, const Ablation& ablation,
                            uint32_t step_count) {
  if (specs.empty()) throw InvalidArgument("build_instance: no tables");
  if (stats.size() != specs.size())
    throw InvalidArgument(
        strfmt("build_instance: %zu stats for %zu specs", stats.size(),
               specs.size()));
  if (step_count < 1)
    throw InvalidArgument("build_instance: step_count must be >= 1");
  validate(system);

  std::unordered_map<uint32_t, const FeatureStats*> stats_of;
  for (const auto& st : stats) stats_of[st.table_id] = &st;

  MilpInstance inst;
  inst.system = system;
  inst.ablation = ablation;
  inst.step_count = step_count;
  inst.tables.reserve(specs.size());
  for (const auto& spec : specs) {
    validate(spec);
    auto it = stats_of.find(spec.table_id);
    if (it == stats_of.end())
      throw InvalidArgument(
          strfmt("build_instance: no stats for table %u", spec.table_id));
    const FeatureStats& st = *it->second;
    if (st.icdf_steps.size() != kIcdfPercentSteps + 1)
      throw InvalidArgument(
          strfmt("build_instance: table %u stats lack the 101-entry icdf",
                 spec.table_id));
    if (st.icdf_steps.back() > spec.hash_size)
      throw InvalidArgument(
          strfmt("build_instance: table %u icdf exceeds hash_size",
                 spec.table_id));
    inst.tables.push_back({spec, st});
  }
  return inst;
}

uint64_t variable_count(const MilpInstance& instance) {
  uint64_t j = instance.tables.size();
  uint64_t m = instance.system.num_gpus;
  uint64_t steps = instance.step_count + 1;
  return m * j       // p_m_j
         + steps * j  // x_i_j
         + j          // mem_j
         + j          // pct_j
         + m          // c_m
         + 1;         // C
}

}  // namespace shardplan
