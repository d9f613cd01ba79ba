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

#include "sloscale/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sloscale/error.hpp"

namespace sloscale::sim {

namespace {

constexpr double kMaxRho = 0.99;

[[noreturn]] void invalid(const std::string& what) {
  throw Error(ErrorCode::kConfigInvalid, what);
}

struct Instance {
  int service;
  double cores;
};

}  // namespace

void validate(const LlpProfile& profile) {
  if (!(profile.capacity_p1 > 0.0)) invalid("llp: capacity_p1 must be positive");
  if (!(profile.base_latency_p2 > 0.0)) invalid("llp: base_latency_p2 must be positive");
  if (!(profile.noise_sigma >= 0.0)) invalid("llp: noise_sigma must be non-negative");
}

double llp_latency(const LlpProfile& profile, double per_instance_load) {
  double rho = std::min(std::max(per_instance_load, 0.0) / profile.capacity_p1, kMaxRho);
  return profile.base_latency_p2 / (1.0 - rho);
}

double sample_request_latency(const LlpProfile& profile, double per_instance_load, Rng& rng) {
  double latency = llp_latency(profile, per_instance_load);
  if (profile.noise_sigma == 0.0) return latency;
  std::normal_distribution<double> normal(0.0, profile.noise_sigma);
  return latency * std::exp(normal(rng));
}

double ClusterState::allocated_cores() const {
  double total = 0.0;
  for (std::size_t s = 0; s < services.size(); ++s) {
    total += runtime[s].replicas * current_tier(static_cast<int>(s)).cpu_cores;
  }
  return total;
}

double ClusterState::max_cost_cores() const {
  double total = 0.0;
  for (const auto& spec : services) {
    double largest = 0.0;
    for (const auto& tier : spec.tiers) largest = std::max(largest, tier.cpu_cores);
    total += spec.max_replicas * largest;
  }
  return total;
}

ClusterState make_cluster(std::vector<ServiceSpec> services, std::vector<double> machine_cores) {
  if (services.empty()) invalid("cluster: no services");
  if (machine_cores.empty()) invalid("cluster: no machines");
  for (double c : machine_cores) {
    if (!(c > 0.0)) invalid("cluster: machine cores must be positive");
  }
  ClusterState state;
  for (const auto& spec : services) {
    if (spec.tiers.size() < 2) invalid("service " + spec.name + ": needs at least two tiers");
    for (std::size_t i = 0; i < spec.tiers.size(); ++i) {
      if (!(spec.tiers[i].cpu_cores > 0.0)) invalid("service " + spec.name + ": tier cores must be positive");
      validate(spec.tiers[i].llp);
      for (std::size_t j = 0; j < i; ++j) {
        if (spec.tiers[j].cpu_cores == spec.tiers[i].cpu_cores) {
          invalid("service " + spec.name + ": tiers must differ in cpu_cores");
        }
      }
    }
    if (spec.max_replicas < 1) invalid("service " + spec.name + ": max_replicas < 1");
    if (spec.initial_replicas < 1 || spec.initial_replicas > spec.max_replicas) {
      invalid("service " + spec.name + ": initial_replicas out of range");
    }
    if (spec.initial_tier < 0 || spec.initial_tier >= static_cast<int>(spec.tiers.size())) {
      invalid("service " + spec.name + ": initial_tier out of range");
    }
    ServiceRuntime rt;
    rt.replicas = spec.initial_replicas;
    rt.tier = spec.initial_tier;
    rt.p99_ms = spec.tiers[spec.initial_tier].llp.base_latency_p2;
    state.runtime.push_back(rt);
  }
  state.services = std::move(services);
  state.machine_cores = std::move(machine_cores);
  return state;
}

std::optional<Placement> place(const ClusterState& state) {
  const std::size_t n_services = state.services.size();
  std::vector<Instance> instances;
  for (std::size_t s = 0; s < n_services; ++s) {
    double cores = state.current_tier(static_cast<int>(s)).cpu_cores;
    for (int r = 0; r < state.runtime[s].replicas; ++r) {
      instances.push_back({static_cast<int>(s), cores});
    }
  }
  std::stable_sort(instances.begin(), instances.end(),
                   [](const Instance& a, const Instance& b) { return a.cores > b.cores; });

  Placement placement;
  placement.count.assign(state.machine_cores.size(), std::vector<int>(n_services, 0));
  placement.allocated.assign(state.machine_cores.size(), 0.0);
  for (const Instance& inst : instances) {
    bool placed = false;
    for (std::size_t m = 0; m < state.machine_cores.size(); ++m) {
      if (placement.allocated[m] + inst.cores <= state.machine_cores[m] + 1e-9) {
        placement.allocated[m] += inst.cores;
        ++placement.count[m][inst.service];
        placed = true;
        break;
      }
    }
    if (!placed) return std::nullopt;
  }
  return placement;
}

double percentile(std::vector<double>& values, double q) {
  if (values.empty()) return 0.0;
  auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(values.size())));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  auto nth = values.begin() + static_cast<std::ptrdiff_t>(rank - 1);
  std::nth_element(values.begin(), nth, values.end());
  return *nth;
}

Simulator::Simulator(std::uint64_t seed, SimOptions options) : rng_(seed), options_(options) {
  if (options_.min_samples < 1 || options_.max_samples < options_.min_samples) {
    invalid("simulator: bad sample window bounds");
  }
}

TickMetrics Simulator::simulate_tick(ClusterState& state, std::span<const Chain> chains,
                                     std::span<const double> arrivals) {
  if (arrivals.size() != chains.size()) {
    throw Error(ErrorCode::kShapeMismatch, "simulate_tick: one arrival rate per chain expected");
  }
  const std::size_t n_services = state.services.size();
  for (const auto& rt : state.runtime) {
    if (rt.replicas < 1) throw Error(ErrorCode::kPlacementInfeasible, "service without replicas");
  }
  auto placement = place(state);
  if (!placement) {
    throw Error(ErrorCode::kPlacementInfeasible, "instances exceed machine capacity");
  }

  // Every node on a chain sees the full chain arrival rate.
  std::vector<double> load(n_services, 0.0);
  for (std::size_t c = 0; c < chains.size(); ++c) {
    if (!(arrivals[c] >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "negative arrivals");
    for (int s : chains[c].services) load[s] += arrivals[c];
  }

  std::vector<double> per_instance(n_services);
  for (std::size_t s = 0; s < n_services; ++s) {
    per_instance[s] = load[s] / state.runtime[s].replicas;
  }

  TickMetrics m;
  m.tick = state.tick;
  std::vector<std::vector<double>> service_samples(n_services);
  for (std::size_t c = 0; c < chains.size(); ++c) {
    const Chain& chain = chains[c];
    const ChainGraph& g = chain.graph;
    auto n_req = static_cast<int>(std::llround(arrivals[c]));
    n_req = std::clamp(n_req, options_.min_samples, options_.max_samples);
    std::vector<double> e2e(n_req);
    std::vector<double> finish(g.node_count());
    for (int r = 0; r < n_req; ++r) {
      for (int v : g.topological_order()) {
        int s = chain.services[v];
        double lat = sample_request_latency(state.current_tier(s).llp, per_instance[s], rng_);
        service_samples[s].push_back(lat);
        double start = 0.0;
        for (int p : g.parents()[v]) start = std::max(start, finish[p]);
        finish[v] = start + lat;
      }
      e2e[r] = finish[g.exit()];
    }
    double p99 = percentile(e2e, 0.99);
    m.chain_p99_ms.push_back(p99);
    m.chain_violation.push_back(p99 > chain.slo_ms ? 1 : 0);
  }

  m.service_p99_ms.resize(n_services);
  m.service_load = load;
  m.service_utilization.resize(n_services);
  for (std::size_t s = 0; s < n_services; ++s) {
    const InstanceTier& tier = state.current_tier(static_cast<int>(s));
    m.service_p99_ms[s] = service_samples[s].empty() ? llp_latency(tier.llp, per_instance[s])
                                                     : percentile(service_samples[s], 0.99);
    double rho = std::min(per_instance[s] / tier.llp.capacity_p1, 1.0);
    m.service_utilization[s] = rho;
    auto& rt = state.runtime[s];
    rt.offered_load = load[s];
    rt.utilization = rho;
    rt.p99_ms = m.service_p99_ms[s];
  }

  double busy_total = 0.0;
  double alloc_total = 0.0;
  for (std::size_t k = 0; k < state.machine_cores.size(); ++k) {
    if (placement->allocated[k] <= 0.0) continue;
    double busy = 0.0;
    for (std::size_t s = 0; s < n_services; ++s) {
      busy += placement->count[k][s] * m.service_utilization[s] *
              state.current_tier(static_cast<int>(s)).cpu_cores;
    }
    m.machine_utilization.push_back(busy / placement->allocated[k]);
    busy_total += busy;
    alloc_total += placement->allocated[k];
  }
  m.cost_cores = state.allocated_cores();
  m.normalized_cost = m.cost_cores / state.max_cost_cores();
  m.mean_utilization = alloc_total > 0.0 ? busy_total / alloc_total : 0.0;
  return m;
}

ScalingResult apply_scaling(const ClusterState& state, std::span<const ScalingDecision> decisions) {
  if (decisions.size() != state.services.size()) {
    throw Error(ErrorCode::kShapeMismatch, "apply_scaling: one decision per service expected");
  }
  ScalingResult result{state, {}};
  ClusterState& next = result.state;
  ++next.tick;
  for (std::size_t s = 0; s < state.services.size(); ++s) {
    const auto& spec = state.services[s];
    const auto& cur = state.runtime[s];
    int want_rep = cur.replicas + decisions[s].replica_delta;
    int want_tier = cur.tier + decisions[s].tier_delta;
    int rep = std::clamp(want_rep, 1, spec.max_replicas);
    int tier = std::clamp(want_tier, 0, static_cast<int>(spec.tiers.size()) - 1);
    if (rep != want_rep || tier != want_tier) {
      result.clamps.push_back({static_cast<int>(s), "range", want_rep, rep, want_tier, tier});
    }
    if (rep == cur.replicas && tier == cur.tier) continue;

    auto& rt = next.runtime[s];
    rt.replicas = rep;
    rt.tier = tier;
    if (!place(next)) {
      rt.replicas = cur.replicas;
      rt.tier = cur.tier;
      result.clamps.push_back({static_cast<int>(s), "capacity", rep, cur.replicas, tier, cur.tier});
      continue;
    }
    if (tier != cur.tier) rt.vertically_scaled = true;
  }
  return result;
}

std::vector<LlpProfile> mutate_environment(ClusterState& state, const Mutation& mutation) {
  if (!(mutation.factor >= 0.3 && mutation.factor <= 3.0)) {
    throw Error(ErrorCode::kInvalidArgument, "mutation factor must lie in [0.3, 3.0]");
  }
  std::vector<LlpProfile> updated;
  for (int s : mutation.services) {
    if (s < 0 || s >= static_cast<int>(state.services.size())) {
      throw Error(ErrorCode::kInvalidArgument, "mutation targets unknown service");
    }
    auto& tiers = state.services[s].tiers;
    auto scale = [&](InstanceTier& tier) {
      tier.llp.capacity_p1 *= mutation.factor;
      if (mutation.scale_base_latency) tier.llp.base_latency_p2 /= mutation.factor;
    };
    if (mutation.kind == MutationKind::kVersionUpgrade) {
      for (auto& tier : tiers) scale(tier);
    } else {
      scale(tiers[state.runtime[s].tier]);
    }
    updated.push_back(state.current_tier(s).llp);
  }
  state.pending_changes.push_back({state.tick, mutation.kind, mutation.services, mutation.factor});
  return updated;
}

}  // namespace sloscale::sim
