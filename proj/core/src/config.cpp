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

#include "shardplan/config.hpp"

#include <fstream>
#include <sstream>

namespace shardplan {

std::string fnv1a_hex(const std::string& bytes) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return strfmt("%016llx", (unsigned long long)h);
}

uint64_t parse_bytes(const std::string& text) {
  size_t pos = 0;
  double v = std::stod(text, &pos);
  std::string suffix = text.substr(pos);
  while (!suffix.empty() && suffix.front() == ' ') suffix.erase(0, 1);
  double mult = 1.0;
  if (suffix == "" || suffix == "B") mult = 1.0;
  else if (suffix == "KB" || suffix == "K") mult = 1024.0;
  else if (suffix == "MB" || suffix == "M") mult = 1024.0 * 1024.0;
  else if (suffix == "GB" || suffix == "G") mult = 1024.0 * 1024.0 * 1024.0;
  else throw InvalidArgument("bad byte size: " + text);
  return static_cast<uint64_t>(v * mult);
}

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> fields(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

}  // namespace

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  std::string raw = buf.str();

  RunConfig cfg;
  cfg.system.batch_size = kDefaultBatchSize;
  cfg.system.bw_hbm = kDefaultBwHbm;
  cfg.system.bw_uvm = kDefaultBwUvm;
  cfg.system.cap_hbm_bytes = 24ULL << 30;
  cfg.system.cap_dram_bytes = 128ULL << 30;
  cfg.config_hash = fnv1a_hex(raw);

  std::istringstream is(raw);
  std::string line;
  std::string section;
  size_t ln = 0;
  while (std::getline(is, line)) {
    ++ln;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[' && line.back() == ']') {
      section = line.substr(1, line.size() - 2);
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("config: expected key = value", ln);
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    try {
      if (section == "workload") {
        if (key == "num_samples") cfg.num_samples = std::stoull(val);
        else if (key == "seed") cfg.workload_seed = std::stoull(val);
        else if (key == "trace") cfg.trace_path = val;
        else if (key == "compress") cfg.compress = val == "true" || val == "1";
        else if (key == "table") {
          auto f = fields(val);
          if (f.size() != 9)
            throw InvalidArgument(
                "workload.table needs 9 fields: id cardinality hash_size dim "
                "elem_bytes zipf mean_pool coverage law");
          WorkloadSpec ws;
          ws.table.table_id = static_cast<uint32_t>(std::stoul(f[0]));
          ws.table.cardinality = std::stoull(f[1]);
          ws.table.hash_size = std::stoull(f[2]);
          ws.table.dim = static_cast<uint32_t>(std::stoul(f[3]));
          ws.table.elem_bytes = static_cast<uint32_t>(std::stoul(f[4]));
          ws.gen.zipf_exponent = std::stod(f[5]);
          ws.gen.mean_pooling = std::stod(f[6]);
          ws.gen.coverage = std::stod(f[7]);
          ws.gen.pooling_law = pooling_law_from_string(f[8]);
          cfg.workload.push_back(ws);
        } else {
          throw InvalidArgument("unknown workload key: " + key);
        }
      } else if (section == "system") {
        if (key == "num_gpus")
          cfg.system.num_gpus = static_cast<uint32_t>(std::stoul(val));
        else if (key == "batch_size") cfg.system.batch_size = std::stoull(val);
        else if (key == "cap_hbm_bytes")
          cfg.system.cap_hbm_bytes = parse_bytes(val);
        else if (key == "cap_dram_bytes")
          cfg.system.cap_dram_bytes = parse_bytes(val);
        else if (key == "bw_hbm") cfg.system.bw_hbm = std::stod(val);
        else if (key == "bw_uvm") cfg.system.bw_uvm = std::stod(val);
        else throw InvalidArgument("unknown system key: " + key);
      } else if (section == "planner") {
        if (key == "strategy") cfg.strategy = val;
        else if (key == "cost") cfg.cost = val;
        else if (key == "step_count")
          cfg.step_count = static_cast<uint32_t>(std::stoul(val));
        else if (key == "time_limit") cfg.time_limit_s = std::stod(val);
        else if (key == "ablation") cfg.ablation = ablation_from_string(val);
        else throw InvalidArgument("unknown planner key: " + key);
      } else if (section == "profiling") {
        if (key == "sample_rate") cfg.sample_rate = std::stod(val);
        else if (key == "seed") cfg.profile_seed = std::stoull(val);
        else throw InvalidArgument("unknown profiling key: " + key);
      } else if (section == "output") {
        if (key == "dir") cfg.out_dir = val;
        else throw InvalidArgument("unknown output key: " + key);
      } else {
        throw InvalidArgument("unknown config section: [" + section + "]");
      }
    } catch (const InvalidArgument&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(strfmt("config: bad value for %s: %s", key.c_str(),
                              e.what()),
                       ln);
    }
  }

  if (cfg.strategy != "milp" && cfg.strategy != "greedy" &&
      cfg.strategy != "ldm")
    throw InvalidArgument("planner.strategy must be milp, greedy, or ldm");
  // The strategy/cost coupling (cost required iff strategy != milp) is
  // checked by the CLI after flag overrides, where it is a usage error.
  if (!(cfg.sample_rate > 0.0 && cfg.sample_rate <= 1.0))
    throw InvalidArgument("profiling.sample_rate must be in (0, 1]");
  if (cfg.workload.empty() && cfg.trace_path.empty())
    throw InvalidArgument(
        "workload: either table entries or a trace path are required");
  if (!cfg.workload.empty() && cfg.num_samples == 0)
    throw InvalidArgument("workload.num_samples must be >= 1");
  return cfg;
}

}  // namespace shardplan
