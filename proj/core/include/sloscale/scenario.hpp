// Copyright 2026 The sloscale Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Scenario files: the cluster, its call chains, the workload, scripted
// mutations and every tunable of the control loop, in one JSON document.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sloscale/gcn.hpp"
#include "sloscale/meta_learner.hpp"
#include "sloscale/sim.hpp"
#include "sloscale/slo_oracle.hpp"
#include "sloscale/td3.hpp"

namespace sloscale::orch {

struct WorkloadSpec {
  enum class Kind { kSynthetic, kTrace };
  Kind kind = Kind::kSynthetic;
  // Synthetic: base * (1 + amplitude * sin(2 pi t / period)) * (1 + noise * Z).
  std::vector<double> base_rps;  // per chain
  double amplitude = 0.0;
  double period = 48.0;
  double noise = 0.0;
  // Trace: rows "tick,chain_id,arrival_rps"; replayed cyclically.
  std::filesystem::path trace_path;
};

struct ControlSettings {
  std::vector<double> v_pref;  // per service
  int max_delta = 2;
  double dead_zone = 0.5;
};

struct AllocatorSettings {
  int few_shot = 10;              // oracle-labelled samples per re-adaptation
  double loss_threshold = 1e-3;   // convergence threshold of re-adaptation
  double sample_jitter = 0.1;     // LLP jitter of the few-shot samples
  double load_spread = 0.3;       // relative load range of the few-shot samples
  bool shift_detection = true;    // periodic checks against the oracle
  int shift_window = 10;
};

struct TrainingSettings {
  int episodes = 40;
  bool randomize_mutations = true;  // draw mutation factors per episode
  double factor_jitter = 0.25;      // relative spread of the drawn factors
  bool randomize_initial_replicas = false;
};

struct TaskSuite {
  std::vector<ChainGraph> structures;
  int train_tasks_per_structure = 3;
  int held_out_tasks = 10;
  int samples_per_task = 40;
  oracle::Range capacity_p1{50.0, 200.0};
  oracle::Range base_latency_p2{2.0, 20.0};
  oracle::Range load{50.0, 600.0};
  oracle::Range budget_factor{1.5, 4.0};
  double jitter = 0.1;
};

struct Scenario {
  std::string name;
  std::vector<double> machines;  // cores per machine
  std::vector<sim::ServiceSpec> services;
  std::vector<sim::Chain> chains;
  WorkloadSpec workload;
  std::vector<sim::Mutation> mutations;
  int horizon = 0;
  sim::SimOptions sim;
  ControlSettings control;
  gcn::FeatureRanges features;
  gcn::GcnConfig gcn;
  AllocatorSettings allocator;
  meta::MetaConfig meta;
  rl::Td3Config td3;
  TrainingSettings training;
  TaskSuite tasks;
};

// overrides are "dotted.key=value" pairs applied to the document before it
// is interpreted; value is read as JSON when it parses, as a string
// otherwise. Relative trace paths resolve against base_dir. Throws
// Error(kConfigInvalid).
Scenario parse_scenario(const std::string& json_text, const std::filesystem::path& base_dir = {},
                        const std::vector<std::string>& overrides = {});
// Throws Error(kConfigNotFound) when the file is missing.
Scenario load_scenario(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

// Arrival rates per tick and chain.
class Workload {
 public:
  Workload(const Scenario& scenario, std::uint64_t seed);
  std::vector<double> arrivals(std::int64_t tick) const;
  // Largest mean rate the workload can produce, per chain.
  const std::vector<double>& peak() const { return peak_; }

 private:
  WorkloadSpec spec_;
  std::uint64_t seed_;
  std::vector<std::vector<double>> trace_;  // [tick][chain]
  std::vector<double> peak_;
};

// Rows "tick,chain_id,arrival_rps" with that header; chain_id is a chain name
// or index. Every tick from 0 to the last one needs a row per chain.
std::vector<std::vector<double>> read_trace(const std::filesystem::path& path, const std::vector<sim::Chain>& chains);

// Task specs for meta-training (prefix "train") or evaluation ("held"):
// random base LLPs per node, one structure after another.
std::vector<oracle::TaskSpec> make_task_specs(const TaskSuite& suite, bool held_out, std::uint64_t seed);

}  // namespace sloscale::orch
