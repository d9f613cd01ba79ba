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

#include "sloscale/orchestrator.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include <gtest/gtest.h>

#include "sloscale/error.hpp"

namespace sloscale::orch {
namespace {

constexpr const char* kDoc = R"({
  "name": "small",
  "machines": [16, 16],
  "services": [
    {"name": "a", "max_replicas": 6, "initial_replicas": 2,
     "tiers": [{"cpu_cores": 1, "p1": 100, "p2": 5, "sigma": 0.1}, {"cpu_cores": 2, "p1": 180, "p2": 4, "sigma": 0.1}]},
    {"name": "b", "max_replicas": 6, "initial_replicas": 2,
     "tiers": [{"cpu_cores": 1, "p1": 80, "p2": 6, "sigma": 0.1}, {"cpu_cores": 2, "p1": 144, "p2": 5, "sigma": 0.1}]}
  ],
  "chains": [{"name": "ab", "services": ["a", "b"], "slo_ms": 40}],
  "workload": {"kind": "synthetic", "base_rps": [120], "amplitude": 0.2, "period": 8, "noise": 0.05},
  "mutations": [{"tick": 6, "kind": "version_upgrade", "services": ["b"], "factor": 0.6}],
  "horizon": 12,
  "sim": {"min_samples": 50, "max_samples": 200},
  "allocator": {"few_shot": 10},
  "meta": {"adapt_steps_budget": 20},
  "td3": {"hidden": 16, "batch_size": 16, "warmup": 16},
  "training": {"episodes": 2}
})";

struct Fixture {
  Scenario sc;
  Eigen::VectorXd theta;
  explicit Fixture(std::vector<std::string> overrides = {}) : sc(parse_scenario(kDoc, {}, overrides)) {
    theta = gcn::GcnModel(sc.gcn).init_params(1);
  }
  RunReport Eval(Variant v, std::uint64_t seed) {
    rl::Td3Agent agent(state_dim(sc, v), 4, sc.td3, seed);
    return evaluate(sc, v, theta, agent, seed);
  }
};

TEST(Variant, Names) {
  EXPECT_EQ(parse_variant("partial-slo"), Variant::kPartialSlo);
  EXPECT_EQ(parse_variant("plain"), Variant::kPlain);
  EXPECT_STREQ(variant_name(Variant::kPlain), "plain");
  EXPECT_THROW(parse_variant("other"), Error);
}

TEST(Run, EmptyHorizon) {
  Fixture f({"horizon=0", "mutations=[]"});
  auto r = f.Eval(Variant::kPartialSlo, 1);
  EXPECT_TRUE(r.ticks.empty());
  EXPECT_TRUE(r.events.empty());
  EXPECT_TRUE(r.complete);
}

TEST(Run, SingleStartupAllocation) {
  Fixture f({"mutations=[]", "control.dead_zone=1.5", "allocator.shift_detection=false"});
  ClusterEnv env(f.sc, Variant::kPartialSlo, 3, f.theta);
  rl::Td3Agent agent(env.state_dim(), env.action_dim(), f.sc.td3, 3);
  rl::evaluate_episode(env, agent, f.sc.horizon);
  EXPECT_EQ(env.allocator_runs(), 1);
  int reallocations = 0;
  for (const auto& e : env.report().events) reallocations += e.kind == EventKind::kReallocation;
  EXPECT_EQ(reallocations, 1);
  EXPECT_EQ(env.report().ticks.size(), 12u);
  EXPECT_EQ(env.slo_partial().size(), 2u);
}

TEST(Run, MutationTriggersReallocation) {
  Fixture f({"control.dead_zone=1.5", "allocator.shift_detection=false"});
  auto r = f.Eval(Variant::kPartialSlo, 2);
  std::int64_t changed = -1, realloc = -1;
  for (const auto& e : r.events) {
    if (e.kind == EventKind::kLlpChanged && changed < 0) changed = e.tick;
    if (e.kind == EventKind::kReallocation && e.tick > 0 && realloc < 0) realloc = e.tick;
  }
  EXPECT_EQ(changed, 6);
  ASSERT_GE(realloc, 0);
  EXPECT_LE(realloc - changed, 1);
}

TEST(Run, VerticalMoveTriggersReallocation) {
  Fixture f({"mutations=[]", "allocator.shift_detection=false"});
  ClusterEnv env(f.sc, Variant::kPartialSlo, 3, f.theta);
  env.reset();
  Eigen::VectorXd up(4);
  up << 0.0, 1.0, 0.0, 0.0;
  env.step(up);
  const auto& ev = env.report().events;
  ASSERT_GE(ev.size(), 2u);
  EXPECT_EQ(ev[ev.size() - 2].kind, EventKind::kVerticalScaled);
  EXPECT_EQ(ev.back().kind, EventKind::kReallocation);
  EXPECT_EQ(env.allocator_runs(), 2);
}

TEST(Run, PlainVariantSkipsAllocator) {
  Fixture f;
  auto r = f.Eval(Variant::kPlain, 2);
  for (const auto& e : r.events) EXPECT_NE(e.kind, EventKind::kReallocation);
  for (const auto& t : r.ticks) EXPECT_TRUE(std::isnan(t.services[0].slo_partial_ms));
  std::ostringstream csv;
  write_metrics_csv(csv, r);
  EXPECT_NE(csv.str().find(",,"), std::string::npos);
}

TEST(Run, SameSeedSameBytes) {
  Fixture f;
  for (auto v : {Variant::kPartialSlo, Variant::kPlain}) {
    std::string out[2];
    for (auto& s : out) {
      rl::Td3Agent agent(state_dim(f.sc, v), 4, f.sc.td3, 5);
      std::vector<rl::EpisodeStats> log;
      auto r = run(f.sc, RunMode::kTrain, v, 5, f.theta, agent, &log);
      std::ostringstream o;
      write_metrics_csv(o, r);
      write_events_csv(o, r);
      rl::write_training_log(o, log);
      s = o.str();
    }
    EXPECT_EQ(out[0], out[1]) << variant_name(v);
  }
}

TEST(Run, PartialSloFillsState) {
  Fixture f;
  ClusterEnv env(f.sc, Variant::kPartialSlo, 1, f.theta);
  Eigen::VectorXd s = env.reset();
  EXPECT_EQ(s.size(), 12);
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    EXPECT_GE(s[i], 0.0);
    EXPECT_LE(s[i], 2.0);
  }
  double total = env.slo_partial()[0] + env.slo_partial()[1];
  EXPECT_LE(total, 40.0 + 1e-9);
}

TEST(Run, PartialVariantNeedsTheta) {
  Fixture f;
  EXPECT_THROW(ClusterEnv(f.sc, Variant::kPartialSlo, 1, Eigen::VectorXd()), Error);
}

TEST(Compare, IdenticalAndBetter) {
  Fixture f;
  auto r = f.Eval(Variant::kPlain, 4);
  auto c = compare_runs(r, r);
  EXPECT_EQ(c.violation_rate_delta, 0.0);
  EXPECT_EQ(c.cost_delta, 0.0);
  EXPECT_EQ(c.adaptation_steps_delta, 0.0);

  RunReport better = r, worse = r;
  for (auto& t : better.ticks) t.chain_violation.assign(t.chain_violation.size(), 0);
  for (auto& t : worse.ticks) t.chain_violation.assign(t.chain_violation.size(), 1);
  EXPECT_LT(compare_runs(better, worse).violation_rate_delta, 0.0);
}

// Violation rate and mean cost recomputed from the metrics CSV alone.
std::pair<double, double> FromCsv(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  std::map<long, std::pair<int, double>> per_tick;
  while (std::getline(in, line)) {
    std::vector<std::string> cols;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cols.push_back(cell);
    if (!line.empty() && line.back() == ',') cols.emplace_back();
    per_tick[std::stol(cols[0])] = {std::stoi(cols[9]), std::stod(cols[11])};
  }
  double v = 0, c = 0;
  for (const auto& [tick, vc] : per_tick) {
    v += vc.first;
    c += vc.second;
  }
  return {v / per_tick.size(), c / per_tick.size()};
}

TEST(Compare, DeltasMatchCsv) {
  Fixture f;
  auto a = f.Eval(Variant::kPartialSlo, 6);
  auto b = f.Eval(Variant::kPlain, 6);
  std::ostringstream ca, cb;
  write_metrics_csv(ca, a);
  write_metrics_csv(cb, b);
  auto [va, costa] = FromCsv(ca.str());
  auto [vb, costb] = FromCsv(cb.str());
  auto c = compare_runs(a, b);
  EXPECT_NEAR(c.violation_rate_delta, va - vb, 1e-12);
  EXPECT_NEAR(c.cost_delta, costa - costb, 1e-9);
}

TEST(Summary, Format) {
  Fixture f;
  auto r = f.Eval(Variant::kPlain, 1);
  std::ostringstream o;
  write_summary(o, r);
  EXPECT_NE(o.str().find("variant: plain"), std::string::npos);
  EXPECT_NE(o.str().find("complete: yes"), std::string::npos);
}

TEST(BuildTasks, SplitPerSpec) {
  Fixture f({"tasks={\"structures\":[{\"nodes\":2,\"edges\":[[0,1]]}],\"train_tasks_per_structure\":2,"
             "\"held_out_tasks\":1,\"samples_per_task\":12}"});
  auto pool = build_tasks(f.sc, false, 1);
  ASSERT_EQ(pool.size(), 2u);
  EXPECT_EQ(pool[0].train.size() + pool[0].test.size(), 12u);
  EXPECT_EQ(build_tasks(f.sc, true, 1).size(), 1u);
}

}  // namespace
}  // namespace sloscale::orch
