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

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "sloscale/gcn.hpp"
#include "sloscale/meta_learner.hpp"
#include "sloscale/orchestrator.hpp"
#include "sloscale/scenario.hpp"
#include "sloscale/sim.hpp"
#include "sloscale/slo_oracle.hpp"
#include "sloscale/td3.hpp"

namespace {

using namespace sloscale;

const orch::Scenario& dynamic() {
  static const orch::Scenario sc = orch::load_scenario(SLOSCALE_SCENARIO_DIR "/dynamic_chain.json");
  return sc;
}

oracle::AllocationProblem diamond() {
  oracle::AllocationProblem p;
  p.graph = ChainGraph(4, {{0, 1}, {0, 2}, {1, 3}, {2, 3}});
  p.profiles = {{120, 4, 0}, {80, 8, 0}, {100, 6, 0}, {60, 10, 0}};
  p.loads.assign(4, 200.0);
  p.cores.assign(4, 1.0);
  p.budget_ms = 60.0;
  return p;
}

oracle::AllocationProblem series3() {
  oracle::AllocationProblem p;
  p.graph = ChainGraph::series(3);
  p.profiles = {{120, 4, 0}, {80, 8, 0}, {100, 6, 0}};
  p.loads.assign(3, 200.0);
  p.cores.assign(3, 1.0);
  p.budget_ms = 45.0;
  return p;
}

void BM_SimulateTick(benchmark::State& state) {
  const auto& sc = dynamic();
  auto cluster = sim::make_cluster(sc.services, sc.machines);
  sim::Simulator simulator(1);
  const std::vector<double> arrivals{static_cast<double>(state.range(0))};
  for (auto _ : state) benchmark::DoNotOptimize(simulator.simulate_tick(cluster, sc.chains, arrivals));
}
BENCHMARK(BM_SimulateTick)->Arg(100)->Arg(1000);

void BM_AllocateGd(benchmark::State& state) {
  const auto p = diamond();
  for (auto _ : state) benchmark::DoNotOptimize(oracle::allocate_gd(p));
}
BENCHMARK(BM_AllocateGd);

void BM_AllocateGrid3(benchmark::State& state) {
  const auto p = series3();
  for (auto _ : state) benchmark::DoNotOptimize(oracle::allocate_grid(p, 0.5));
}
BENCHMARK(BM_AllocateGrid3);

void BM_GcnForward(benchmark::State& state) {
  gcn::GcnModel model;
  const auto p = model.init_params(1);
  const auto s = gcn::make_sample(diamond(), {});
  for (auto _ : state) benchmark::DoNotOptimize(model.predict(p, s));
}
BENCHMARK(BM_GcnForward);

void BM_GcnBackward(benchmark::State& state) {
  gcn::GcnModel model;
  const auto p = model.init_params(1);
  oracle::DatasetRecord rec;
  rec.problem = diamond();
  rec.label.partial_slo = oracle::allocate_gd(rec.problem).relaxed_slo;
  const auto ls = gcn::make_labeled(rec, {});
  Eigen::VectorXd g;
  for (auto _ : state) benchmark::DoNotOptimize(model.backward(p, ls, g));
}
BENCHMARK(BM_GcnBackward);

void BM_MetaStep(benchmark::State& state) {
  const auto& sc = dynamic();
  const auto tasks = orch::build_tasks(sc, false, 1);
  gcn::GcnModel model(sc.gcn);
  const auto theta = model.init_params(1);
  std::vector<const meta::Task*> batch;
  for (std::size_t i = 0; i < static_cast<std::size_t>(sc.meta.tasks_per_batch) && i < tasks.size(); ++i) batch.push_back(&tasks[i]);
  for (auto _ : state) benchmark::DoNotOptimize(meta::meta_step(model, theta, batch, sc.meta));
}
BENCHMARK(BM_MetaStep)->Unit(benchmark::kMillisecond);

void BM_Td3Update(benchmark::State& state) {
  rl::Td3Config cfg;
  cfg.warmup = 0;
  const int s = 24, a = 8;
  rl::Td3Agent agent(s, a, cfg, 1);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 1024; ++i) {
    rl::Transition t;
    t.state = Eigen::VectorXd::NullaryExpr(s, [&] { return u(rng); });
    t.action = Eigen::VectorXd::NullaryExpr(a, [&] { return u(rng); });
    t.reward = u(rng);
    t.next_state = Eigen::VectorXd::NullaryExpr(s, [&] { return u(rng); });
    agent.remember(std::move(t));
  }
  for (auto _ : state) benchmark::DoNotOptimize(agent.update());
}
BENCHMARK(BM_Td3Update);

}  // namespace

BENCHMARK_MAIN();
