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

#include "sloscale/scenario.hpp"

#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "sloscale/error.hpp"

namespace sloscale::orch {
namespace {

constexpr const char* kDoc = R"({
  "name": "t",
  "machines": [8, 8],
  "services": [
    {"name": "a", "max_replicas": 4, "initial_replicas": 2,
     "tiers": [{"cpu_cores": 1, "p1": 100, "p2": 5}, {"cpu_cores": 2, "p1": 180, "p2": 4}]},
    {"name": "b", "max_replicas": 4,
     "tiers": [{"cpu_cores": 1, "p1": 80, "p2": 6}, {"cpu_cores": 2, "p1": 150, "p2": 5}]}
  ],
  "chains": [{"name": "ab", "services": ["a", "b"], "slo_ms": 40}],
  "workload": {"kind": "synthetic", "base_rps": [100], "amplitude": 0.2, "period": 10, "noise": 0.1},
  "mutations": [{"at_fraction": 0.5, "kind": "version_upgrade", "services": ["b"], "factor": 0.7}],
  "horizon": 20
})";

ErrorCode CodeOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kIo;
}

TEST(Parse, Basics) {
  auto sc = parse_scenario(kDoc);
  EXPECT_EQ(sc.name, "t");
  ASSERT_EQ(sc.services.size(), 2u);
  EXPECT_EQ(sc.services[0].initial_replicas, 2);
  EXPECT_TRUE(sc.chains[0].graph.is_series());
  ASSERT_EQ(sc.mutations.size(), 1u);
  EXPECT_EQ(sc.mutations[0].tick, 10);
  EXPECT_EQ(sc.mutations[0].services, std::vector<int>{1});
  EXPECT_EQ(sc.control.v_pref, (std::vector<double>{0.6, 0.6}));
}

TEST(Parse, Overrides) {
  auto sc = parse_scenario(kDoc, {}, {"td3.gamma=0.5", "horizon=7", "name=\"x\"", "control.v_pref=0.3"});
  EXPECT_EQ(sc.td3.gamma, 0.5);
  EXPECT_EQ(sc.horizon, 7);
  EXPECT_EQ(sc.name, "x");
  EXPECT_EQ(sc.control.v_pref[1], 0.3);
}

TEST(Parse, Rejections) {
  EXPECT_EQ(CodeOf([] { parse_scenario("{"); }), ErrorCode::kConfigInvalid);
  EXPECT_EQ(CodeOf([] { parse_scenario(kDoc, {}, {"bogus=1"}); }), ErrorCode::kConfigInvalid);
  EXPECT_EQ(CodeOf([] { parse_scenario(kDoc, {}, {"td3.gamma=2"}); }), ErrorCode::kConfigInvalid);
  EXPECT_EQ(CodeOf([] { parse_scenario(kDoc, {}, {"no_equals_sign"}); }), ErrorCode::kConfigInvalid);
  EXPECT_EQ(CodeOf([] { parse_scenario(kDoc, {}, {"mutations.0.factor=9"}); }), ErrorCode::kConfigInvalid);
}

TEST(Load, MissingFile) {
  EXPECT_EQ(CodeOf([] { load_scenario("/nonexistent/scenario.json"); }), ErrorCode::kConfigNotFound);
}

TEST(Load, BundledScenarios) {
  for (const char* name : {"stationary.json", "dynamic_chain.json"}) {
    auto sc = load_scenario(std::filesystem::path(SLOSCALE_SCENARIO_DIR) / name);
    EXPECT_GT(sc.horizon, 0) << name;
    EXPECT_FALSE(sc.tasks.structures.empty()) << name;
  }
}

TEST(Workload, DeterministicPerTick) {
  auto sc = parse_scenario(kDoc);
  Workload a(sc, 4), b(sc, 4), c(sc, 5);
  EXPECT_EQ(a.arrivals(13), b.arrivals(13));
  EXPECT_EQ(a.arrivals(3), a.arrivals(3));
  EXPECT_NE(a.arrivals(13), c.arrivals(13));
  for (int t = 0; t < 50; ++t) EXPECT_GE(a.arrivals(t)[0], 0.0);
}

TEST(Workload, NoiselessSine) {
  auto sc = parse_scenario(kDoc, {}, {"workload.noise=0"});
  Workload w(sc, 1);
  EXPECT_NEAR(w.arrivals(0)[0], 100.0, 1e-12);
  EXPECT_NEAR(w.arrivals(5)[0], 100.0, 1e-9);
  EXPECT_NEAR(w.arrivals(2)[0], 100 * (1 + 0.2 * std::sin(2 * M_PI * 2 / 10)), 1e-9);
}

class TraceTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() / "sloscale_trace_test";
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::filesystem::path Write(const std::string& body) {
    auto p = dir_ / "trace.csv";
    std::ofstream(p) << body;
    return p;
  }
  std::filesystem::path dir_;
};

TEST_F(TraceTest, ReplaysCyclically) {
  Write("tick,chain_id,arrival_rps\n0,ab,10\n1,ab,20\n2,0,30\n");
  auto sc = parse_scenario(kDoc, dir_, {"workload={\"kind\":\"trace\",\"trace\":\"trace.csv\"}"});
  Workload w(sc, 1);
  EXPECT_EQ(w.arrivals(1)[0], 20.0);
  EXPECT_EQ(w.arrivals(5)[0], 30.0);
  EXPECT_EQ(w.peak()[0], 30.0);
}

TEST_F(TraceTest, RejectsBadHeaderAndGaps) {
  auto sc = parse_scenario(kDoc);
  Write("t,c,r\n0,ab,1\n");
  EXPECT_EQ(CodeOf([&] { read_trace(dir_ / "trace.csv", sc.chains); }), ErrorCode::kConfigInvalid);
  Write("tick,chain_id,arrival_rps\n0,ab,1\n2,ab,1\n");
  EXPECT_EQ(CodeOf([&] { read_trace(dir_ / "trace.csv", sc.chains); }), ErrorCode::kConfigInvalid);
  Write("tick,chain_id,arrival_rps\n0,zz,1\n");
  EXPECT_EQ(CodeOf([&] { read_trace(dir_ / "trace.csv", sc.chains); }), ErrorCode::kConfigInvalid);
}

TEST(TaskSpecs, NamesAndStructures) {
  TaskSuite suite;
  suite.structures = {ChainGraph::series(2), ChainGraph::series(3)};
  suite.train_tasks_per_structure = 2;
  suite.held_out_tasks = 3;
  auto train = make_task_specs(suite, false, 1);
  auto held = make_task_specs(suite, true, 1);
  ASSERT_EQ(train.size(), 4u);
  ASSERT_EQ(held.size(), 3u);
  EXPECT_EQ(train[0].id, "train000");
  EXPECT_EQ(held[2].id, "held002");
  EXPECT_EQ(train[0].base_profiles.size(), 2u);
  EXPECT_NE(train[0].base_profiles[0].capacity_p1, held[0].base_profiles[0].capacity_p1);
}

}  // namespace
}  // namespace sloscale::orch
