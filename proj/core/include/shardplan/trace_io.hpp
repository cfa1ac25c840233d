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

#include <string>
#include <vector>

#include "shardplan/workload.hpp"

namespace shardplan {

// Trace file format (ASCII, newline delimited; gzip when the path ends .gz):
//   #shardplan-trace v1 tables=<J> samples=<N>
//   T <table_id> <cardinality> <hash_size> <dim> <elem_bytes>   (J lines)
//   R <sample_id> <table_id> <id1>,<id2>,...                    (per record)
// Lines starting with '#' after the header are comments and are ignored.

/// Writes a trace; `comments` (if any) are emitted as '#' lines after the
/// header, typically tool version / config hash / seed.
void write_trace(const Trace& trace, const std::string& path,
                 const std::vector<std::string>& comments = {});

Trace read_trace(const std::string& path);

}  // namespace shardplan
