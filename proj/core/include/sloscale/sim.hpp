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

// Deterministic tick-level model of a machine cluster running microservice
// call chains. One tick is one control interval.

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "sloscale/chain_graph.hpp"

namespace sloscale::sim {

using Rng = std::mt19937_64;

// Load-latency profile of one service version at one instance size.
struct LlpProfile {
  double capacity_p1 = 100.0;     // req/s one instance sustains
  double base_latency_p2 = 10.0;  // ms at zero load
  double noise_sigma = 0.0;       // lognormal dispersion of per-request latency
};

void validate(const LlpProfile& profile);

// p2 / (1 - rho), rho = min(load / p1, 0.99). Non-decreasing in load.
double llp_latency(const LlpProfile& profile, double per_instance_load);

// llp_latency scaled by exp(sigma * Z); the median of the draws is the
// deterministic value.
double sample_request_latency(const LlpProfile& profile, double per_instance_load, Rng& rng);

struct InstanceTier {
  double cpu_cores = 1.0;
  LlpProfile llp;
};

struct ServiceSpec {
  std::string name;
  std::vector<InstanceTier> tiers;
  int max_replicas = 16;
  int initial_replicas = 1;
  int initial_tier = 0;
};

// A chain maps graph node i onto service services[i].
struct Chain {
  std::string name;
  ChainGraph graph;
  std::vector<int> services;
  double slo_ms = 100.0;
};

enum class MutationKind { kVersionUpgrade, kSizeCapacityShift };

struct Mutation {
  std::int64_t tick = 0;
  MutationKind kind = MutationKind::kVersionUpgrade;
  std::vector<int> services;
  double factor = 1.0;
  // When set, base latency is divided by the factor as well.
  bool scale_base_latency = false;
};

struct ChangeEvent {
  std::int64_t tick = 0;
  MutationKind kind = MutationKind::kVersionUpgrade;
  std::vector<int> services;
  double factor = 1.0;
};

struct ServiceRuntime {
  int replicas = 1;
  int tier = 0;
  double offered_load = 0.0;
  double utilization = 0.0;
  double p99_ms = 0.0;
  bool vertically_scaled = false;
};

struct ClusterState {
  std::vector<ServiceSpec> services;  // current profiles, mutations applied
  std::vector<ServiceRuntime> runtime;
  std::vector<double> machine_cores;
  std::int64_t tick = 0;
  std::vector<ChangeEvent> pending_changes;  // consumed by the monitor

  const InstanceTier& current_tier(int service) const {
    return services[service].tiers[runtime[service].tier];
  }
  double allocated_cores() const;
  // Every service at max replicas on its largest tier.
  double max_cost_cores() const;
};

// Throws Error(kConfigInvalid) on bad specs (fewer than two tiers, ...).
ClusterState make_cluster(std::vector<ServiceSpec> services, std::vector<double> machine_cores);

// Instances assigned to machines, first-fit by decreasing instance size.
struct Placement {
  std::vector<std::vector<int>> count;  // [machine][service]
  std::vector<double> allocated;        // cores per machine
};

std::optional<Placement> place(const ClusterState& state);

struct TickMetrics {
  std::int64_t tick = 0;
  std::vector<double> service_p99_ms;
  std::vector<double> service_load;
  std::vector<double> service_utilization;
  std::vector<double> chain_p99_ms;
  std::vector<int> chain_violation;  // 0 / 1
  // One entry per machine hosting at least one instance.
  std::vector<double> machine_utilization;
  double cost_cores = 0.0;
  double normalized_cost = 0.0;
  double mean_utilization = 0.0;
};

struct SimOptions {
  int min_samples = 100;
  int max_samples = 1000;
};

class Simulator {
 public:
  explicit Simulator(std::uint64_t seed, SimOptions options = {});

  // Routes arrivals (req/s per chain) through the chains, samples request
  // latencies and updates the runtime fields of state. Throws
  // Error(kPlacementInfeasible) when instances do not fit on the machines.
  TickMetrics simulate_tick(ClusterState& state, std::span<const Chain> chains,
                            std::span<const double> arrivals);

 private:
  Rng rng_;
  SimOptions options_;
};

struct ScalingDecision {
  int replica_delta = 0;
  int tier_delta = 0;
};

struct ClampNote {
  int service = 0;
  std::string reason;
  int requested_replicas = 0;
  int applied_replicas = 0;
  int requested_tier = 0;
  int applied_tier = 0;
};

struct ScalingResult {
  ClusterState state;
  std::vector<ClampNote> clamps;
};

// Returns the state for tick + 1. Out-of-range requests are clamped; changes
// that would not fit on the machines are dropped. Both are reported.
ScalingResult apply_scaling(const ClusterState& state, std::span<const ScalingDecision> decisions);

// Applies a version upgrade (all tiers) or a size capacity shift (current
// tier only) to the targeted services, queues a ChangeEvent, and returns the
// new current-tier profiles of those services.
std::vector<LlpProfile> mutate_environment(ClusterState& state, const Mutation& mutation);

// Nearest-rank percentile, q in (0, 1]. Reorders the input.
double percentile(std::vector<double>& values, double q);

}  // namespace sloscale::sim
