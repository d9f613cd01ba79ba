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
#include <vector>

#include <gtest/gtest.h>

#include "sloscale/error.hpp"
#include "sloscale/slo_oracle.hpp"

namespace sloscale::sim {
namespace {

ServiceSpec Service(const std::string& name, double p1, double p2, double sigma = 0.0, int replicas = 1) {
  ServiceSpec s;
  s.name = name;
  s.tiers = {{1.0, {p1, p2, sigma}}, {2.0, {p1 * 1.8, p2 * 0.8, sigma}}};
  s.max_replicas = 8;
  s.initial_replicas = replicas;
  return s;
}

Chain Series(std::vector<int> services, double slo) {
  Chain c;
  c.name = "c";
  c.graph = ChainGraph::series(static_cast<int>(services.size()));
  c.services = std::move(services);
  c.slo_ms = slo;
  return c;
}

TEST(LlpLatency, ZeroLoadIsBaseLatency) {
  EXPECT_DOUBLE_EQ(llp_latency({100, 10, 0}, 0.0), 10.0);
}

TEST(LlpLatency, HalfUtilizationDoubles) {
  EXPECT_DOUBLE_EQ(llp_latency({100, 10, 0}, 50.0), 20.0);
}

TEST(LlpLatency, OverloadClamps) {
  EXPECT_NEAR(llp_latency({100, 10, 0}, 200.0), 10.0 / 0.01, 1e-9);
  EXPECT_NEAR(llp_latency({100, 10, 0}, 99.0), 10.0 / 0.01, 1e-9);
}

TEST(SampleLatency, NoNoiseIsExact) {
  Rng rng(3);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(sample_request_latency({100, 10, 0}, 40.0, rng), llp_latency({100, 10, 0}, 40.0));
}

TEST(SampleLatency, LognormalMedian) {
  LlpProfile p{100, 10, 0.25};
  Rng rng(11);
  std::vector<double> v(100000);
  for (auto& x : v) x = sample_request_latency(p, 30.0, rng);
  std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
  EXPECT_NEAR(v[v.size() / 2] / llp_latency(p, 30.0), 1.0, 0.02);
}

TEST(SampleLatency, SameSeedSameStream) {
  LlpProfile p{100, 10, 0.3};
  Rng a(5), b(5);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sample_request_latency(p, 20, a), sample_request_latency(p, 20, b));
}

TEST(Percentile, NearestRank) {
  std::vector<double> v;
  for (int i = 100; i >= 1; --i) v.push_back(i);
  EXPECT_EQ(percentile(v, 0.99), 99.0);
  EXPECT_EQ(percentile(v, 0.5), 50.0);
  std::vector<double> one{7.0};
  EXPECT_EQ(percentile(one, 0.99), 7.0);
}

TEST(SimulateTick, IdleSingleNode) {
  auto state = make_cluster({Service("a", 100, 10)}, {4});
  std::vector<Chain> chains{Series({0}, 25)};
  Simulator sim(1);
  std::vector<double> arrivals{0.0};
  auto m = sim.simulate_tick(state, chains, arrivals);
  EXPECT_DOUBLE_EQ(m.chain_p99_ms[0], 10.0);
  EXPECT_EQ(m.chain_violation[0], 0);
}

TEST(SimulateTick, DeterministicSeriesAdds) {
  auto state = make_cluster({Service("a", 100, 10, 0, 2), Service("b", 80, 5)}, {4});
  std::vector<Chain> chains{Series({0, 1}, 100)};
  Simulator sim(1);
  std::vector<double> arrivals{40.0};
  auto m = sim.simulate_tick(state, chains, arrivals);
  EXPECT_NEAR(m.chain_p99_ms[0], llp_latency({100, 10}, 20.0) + llp_latency({80, 5}, 40.0), 1e-12);
}

// Request-by-request replay of the simulator's draw order on a three-node
// chain with noise, compared against the reported metrics.
TEST(SimulateTick, MatchesHandTrace) {
  std::vector<ServiceSpec> services{Service("a", 100, 4, 0.2, 2), Service("b", 60, 6, 0.1, 3),
                                    Service("c", 150, 2, 0.3, 1)};
  auto state = make_cluster(services, {4, 4});
  std::vector<Chain> chains{Series({0, 1, 2}, 40)};
  std::vector<double> arrivals{120.0};
  Simulator sim(77);
  auto m = sim.simulate_tick(state, chains, arrivals);

  Rng rng(77);
  const double per[3] = {60.0, 40.0, 120.0};
  std::vector<double> e2e;
  std::vector<std::vector<double>> node(3);
  for (int r = 0; r < 120; ++r) {
    double t = 0.0;
    for (int s = 0; s < 3; ++s) {
      const LlpProfile& p = services[s].tiers[0].llp;
      double rho = std::min(per[s] / p.capacity_p1, 0.99);
      std::normal_distribution<double> z(0.0, p.noise_sigma);
      double lat = p.base_latency_p2 / (1.0 - rho) * std::exp(z(rng));
      node[s].push_back(lat);
      t += lat;
    }
    e2e.push_back(t);
  }
  auto rank99 = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[static_cast<std::size_t>(std::ceil(0.99 * v.size())) - 1];
  };
  EXPECT_DOUBLE_EQ(m.chain_p99_ms[0], rank99(e2e));
  for (int s = 0; s < 3; ++s) {
    EXPECT_DOUBLE_EQ(m.service_p99_ms[s], rank99(node[s]));
    EXPECT_DOUBLE_EQ(m.service_utilization[s], std::min(per[s] / services[s].tiers[0].llp.capacity_p1, 1.0));
  }
  EXPECT_EQ(m.chain_violation[0], rank99(e2e) > 40 ? 1 : 0);
  EXPECT_DOUBLE_EQ(m.cost_cores, 6.0);
  EXPECT_DOUBLE_EQ(m.normalized_cost, 6.0 / (3 * 8 * 2.0));
}

TEST(SimulateTick, ParallelBranchesTakeTheSlowest) {
  auto state = make_cluster({Service("a", 100, 1), Service("b", 100, 5), Service("c", 100, 9), Service("d", 100, 1)},
                            {8});
  Chain c;
  c.graph = ChainGraph(4, {{0, 1}, {0, 2}, {1, 3}, {2, 3}});
  c.services = {0, 1, 2, 3};
  c.slo_ms = 100;
  std::vector<Chain> chains{c};
  std::vector<double> arrivals{0.0};
  Simulator sim(1);
  auto m = sim.simulate_tick(state, chains, arrivals);
  EXPECT_DOUBLE_EQ(m.chain_p99_ms[0], 11.0);
}

TEST(SimulateTick, PlacementFailure) {
  auto spec = Service("a", 100, 10, 0, 8);
  auto state = make_cluster({spec}, {2, 2});
  std::vector<Chain> chains{Series({0}, 25)};
  std::vector<double> arrivals{10.0};
  Simulator sim(1);
  try {
    sim.simulate_tick(state, chains, arrivals);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kPlacementInfeasible);
  }
}

TEST(Place, FirstFitDecreasing) {
  auto a = Service("a", 100, 10, 0, 1);
  a.initial_tier = 1;  // 2 cores
  auto b = Service("b", 100, 10, 0, 3);
  auto state = make_cluster({a, b}, {3, 2});
  auto p = place(state);
  ASSERT_TRUE(p.has_value());
  EXPECT_EQ(p->count[0][0], 1);
  EXPECT_EQ(p->count[0][1], 1);
  EXPECT_EQ(p->count[1][1], 2);
  EXPECT_DOUBLE_EQ(p->allocated[0], 3.0);
  EXPECT_DOUBLE_EQ(p->allocated[1], 2.0);
}

TEST(ApplyScaling, NoOpAdvancesTick) {
  auto state = make_cluster({Service("a", 100, 10, 0, 2)}, {4});
  std::vector<ScalingDecision> d(1);
  auto r = apply_scaling(state, d);
  EXPECT_EQ(r.state.tick, state.tick + 1);
  EXPECT_EQ(r.state.runtime[0].replicas, 2);
  EXPECT_EQ(r.state.runtime[0].tier, 0);
  EXPECT_FALSE(r.state.runtime[0].vertically_scaled);
  EXPECT_TRUE(r.clamps.empty());
}

TEST(ApplyScaling, ReplicaIncrement) {
  auto state = make_cluster({Service("a", 100, 10, 0, 2)}, {4});
  std::vector<ScalingDecision> d{{1, 0}};
  EXPECT_EQ(apply_scaling(state, d).state.runtime[0].replicas, 3);
}

TEST(ApplyScaling, TierChangeSwapsProfile) {
  auto state = make_cluster({Service("a", 100, 10, 0, 2)}, {4});
  std::vector<ScalingDecision> d{{0, 1}};
  auto next = apply_scaling(state, d).state;
  EXPECT_EQ(next.runtime[0].tier, 1);
  EXPECT_TRUE(next.runtime[0].vertically_scaled);
  EXPECT_DOUBLE_EQ(next.current_tier(0).llp.capacity_p1, 180.0);
}

TEST(ApplyScaling, ClampsAndReports) {
  auto state = make_cluster({Service("a", 100, 10, 0, 7)}, {16});
  std::vector<ScalingDecision> d{{5, 3}};
  auto r = apply_scaling(state, d);
  EXPECT_EQ(r.state.runtime[0].replicas, 8);
  EXPECT_EQ(r.state.runtime[0].tier, 1);
  ASSERT_FALSE(r.clamps.empty());
  EXPECT_EQ(r.clamps[0].requested_replicas, 12);
  EXPECT_EQ(r.clamps[0].applied_replicas, 8);

  std::vector<ScalingDecision> down{{-20, -1}};
  EXPECT_EQ(apply_scaling(state, down).state.runtime[0].replicas, 1);
}

TEST(Mutate, IdentityFactor) {
  auto state = make_cluster({Service("a", 100, 10)}, {4});
  auto before = state.services;
  mutate_environment(state, {0, MutationKind::kVersionUpgrade, {0}, 1.0});
  EXPECT_EQ(state.services[0].tiers[0].llp.capacity_p1, before[0].tiers[0].llp.capacity_p1);
  EXPECT_EQ(state.services[0].tiers[0].llp.base_latency_p2, before[0].tiers[0].llp.base_latency_p2);
}

TEST(Mutate, FasterVersionLowersLatency) {
  auto state = make_cluster({Service("a", 100, 10)}, {4});
  double before = llp_latency(state.current_tier(0).llp, 60.0);
  mutate_environment(state, {0, MutationKind::kVersionUpgrade, {0}, 2.0});
  EXPECT_LT(llp_latency(state.current_tier(0).llp, 60.0), before);
  EXPECT_DOUBLE_EQ(state.services[0].tiers[1].llp.capacity_p1, 360.0);
  EXPECT_EQ(state.pending_changes.size(), 1u);
}

TEST(Mutate, HalfCapacityAtLeastDoublesReplicas) {
  auto state = make_cluster({Service("a", 100, 10)}, {4});
  for (double load : {50.0, 120.0, 300.0, 777.0}) {
    for (double slo : {12.0, 20.0, 45.0}) {
      auto s = state;
      int before = oracle::replicas_needed(s.current_tier(0).llp, load, slo);
      mutate_environment(s, {0, MutationKind::kVersionUpgrade, {0}, 0.5});
      int after = oracle::replicas_needed(s.current_tier(0).llp, load, slo);
      EXPECT_GE(after, 2 * before - 1) << load << " " << slo;
      double exact_before = load / (100 * (1 - 10 / slo));
      EXPECT_NEAR(load / (50 * (1 - 10 / slo)), 2 * exact_before, 1e-9);
    }
  }
}

TEST(Mutate, CapacityShiftTouchesCurrentTierOnly) {
  auto state = make_cluster({Service("a", 100, 10)}, {4});
  mutate_environment(state, {0, MutationKind::kSizeCapacityShift, {0}, 0.5});
  EXPECT_DOUBLE_EQ(state.services[0].tiers[0].llp.capacity_p1, 50.0);
  EXPECT_DOUBLE_EQ(state.services[0].tiers[1].llp.capacity_p1, 180.0);
}

TEST(Mutate, RejectsOutOfRangeFactor) {
  auto state = make_cluster({Service("a", 100, 10)}, {4});
  EXPECT_THROW(mutate_environment(state, {0, MutationKind::kVersionUpgrade, {0}, 0.1}), Error);
  EXPECT_THROW(mutate_environment(state, {0, MutationKind::kVersionUpgrade, {0}, 4.0}), Error);
}

}  // namespace
}  // namespace sloscale::sim
