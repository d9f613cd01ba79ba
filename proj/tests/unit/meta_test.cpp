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

#include "sloscale/meta_learner.hpp"

#include <algorithm>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "sloscale/error.hpp"

namespace sloscale::meta {
namespace {

std::vector<gcn::LabeledSample> Samples(const ChainGraph& g, int n, std::uint64_t seed) {
  oracle::TaskSpec spec;
  spec.id = "t";
  spec.graph = g;
  spec.cores.assign(g.node_count(), 1.0);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> p1(50, 200), p2(2, 20);
  for (int i = 0; i < g.node_count(); ++i) spec.base_profiles.push_back({p1(rng), p2(rng), 0});
  std::vector<gcn::LabeledSample> out;
  for (const auto& r : oracle::gen_dataset(spec, n, seed).records) out.push_back(gcn::make_labeled(r, {}));
  return out;
}

std::vector<Task> Pool(int n, std::uint64_t seed) {
  std::vector<ChainGraph> shapes{ChainGraph::series(2), ChainGraph::series(3),
                                 ChainGraph(4, {{0, 1}, {0, 2}, {1, 3}, {2, 3}})};
  std::vector<Task> pool;
  for (int i = 0; i < n; ++i) {
    const auto& g = shapes[static_cast<std::size_t>(i) % shapes.size()];
    pool.push_back(split_task("t" + std::to_string(i), g, Samples(g, 20, seed + i), seed + i));
  }
  return pool;
}

TEST(SplitTask, SeventyThirty) {
  auto s = Samples(ChainGraph::series(2), 10, 1);
  ASSERT_EQ(s.size(), 10u);
  auto t = split_task("a", ChainGraph::series(2), s, 3);
  EXPECT_EQ(t.train.size(), 7u);
  EXPECT_EQ(t.test.size(), 3u);
}

TEST(SplitTask, DeterministicAndComplete) {
  auto s = Samples(ChainGraph::series(3), 23, 2);
  auto a = split_task("a", ChainGraph::series(3), s, 5);
  auto b = split_task("a", ChainGraph::series(3), s, 5);
  std::vector<std::vector<double>> in, out;
  for (const auto& x : s) in.push_back(x.target_ms);
  for (std::size_t i = 0; i < a.train.size(); ++i) EXPECT_EQ(a.train[i].target_ms, b.train[i].target_ms);
  for (const auto& x : a.train) out.push_back(x.target_ms);
  for (const auto& x : a.test) out.push_back(x.target_ms);
  std::sort(in.begin(), in.end());
  std::sort(out.begin(), out.end());
  EXPECT_EQ(in, out);
}

TEST(SplitTask, TooFew) {
  auto s = Samples(ChainGraph::series(2), 9, 1);
  try {
    split_task("a", ChainGraph::series(2), s, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTooFewSamples);
  }
}

// Targets replaced by the model's own predictions: zero loss and gradient.
std::vector<gcn::LabeledSample> AtOptimum(const gcn::GcnModel& m, const Eigen::VectorXd& theta,
                                          std::vector<gcn::LabeledSample> s) {
  for (auto& x : s) x.target_ms = m.predict(theta, x.sample);
  return s;
}

TEST(InnerAdapt, StationaryAtZeroGradient) {
  gcn::GcnModel m;
  Eigen::VectorXd theta = m.init_params(1);
  auto s = AtOptimum(m, theta, Samples(ChainGraph::series(3), 10, 4));
  EXPECT_EQ(inner_adapt(m, theta, s, 20.0, 5), theta);
}

TEST(InnerAdapt, RarelyIncreasesTrainLoss) {
  gcn::GcnModel m;
  MetaConfig cfg;
  int worse = 0;
  for (int seed = 0; seed < 50; ++seed) {
    auto s = Samples(seed % 2 ? ChainGraph::series(3) : ChainGraph(4, {{0, 1}, {0, 2}, {1, 3}, {2, 3}}), 10, seed);
    Eigen::VectorXd theta = m.init_params(100 + seed);
    double before = m.loss(theta, s, nullptr);
    double after = m.loss(inner_adapt(m, theta, s, cfg.inner_lr, cfg.inner_steps), s, nullptr);
    if (after > before) ++worse;
  }
  EXPECT_LE(worse, 2);
}

TEST(MetaStep, ZeroOuterRateKeepsTheta) {
  gcn::GcnModel m;
  auto pool = Pool(3, 10);
  MetaConfig cfg;
  cfg.outer_lr = 0.0;
  std::vector<const Task*> batch{&pool[0], &pool[1]};
  Eigen::VectorXd theta = m.init_params(2);
  EXPECT_EQ(meta_step(m, theta, batch, cfg).theta, theta);
}

TEST(MetaStep, TaskAtOptimumKeepsTheta) {
  gcn::GcnModel m;
  Eigen::VectorXd theta = m.init_params(2);
  Task t;
  t.graph = ChainGraph::series(3);
  t.train = AtOptimum(m, theta, Samples(t.graph, 10, 1));
  t.test = AtOptimum(m, theta, Samples(t.graph, 10, 2));
  std::vector<const Task*> batch{&t};
  auto step = meta_step(m, theta, batch, MetaConfig{});
  EXPECT_EQ(step.theta, theta);
  EXPECT_EQ(step.mean_test_loss, 0.0);
}

TEST(MetaTrain, CurveTrendsDown) {
  gcn::GcnModel m;
  MetaConfig cfg;
  cfg.meta_iterations = 60;
  std::vector<double> drops;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto pool = Pool(6, 100 * seed);
    auto r = meta_train(m, m.init_params(seed), pool, cfg, seed);
    ASSERT_EQ(r.curve.size(), 60u);
    auto window = [&](std::size_t from) {
      double s = 0;
      for (std::size_t i = from; i < from + 10; ++i) s += r.curve[i];
      return s / 10;
    };
    drops.push_back(window(50) - window(0));
  }
  std::sort(drops.begin(), drops.end());
  EXPECT_LE(drops[2], 0.0);
}

TEST(MetaTrain, Reproducible) {
  gcn::GcnModel m;
  MetaConfig cfg;
  cfg.meta_iterations = 5;
  auto pool = Pool(5, 3);
  auto a = meta_train(m, m.init_params(1), pool, cfg, 9);
  auto b = meta_train(m, m.init_params(1), pool, cfg, 9);
  EXPECT_EQ(a.theta, b.theta);
  EXPECT_EQ(a.curve, b.curve);
}

TEST(DetectShift, Basics) {
  std::vector<double> zeros(10, 0.0);
  EXPECT_FALSE(detect_shift(zeros, 1e-3));
  std::vector<double> high(10, 5e-3);
  EXPECT_TRUE(detect_shift(high, 1e-3));
  std::vector<double> few(4, 1.0);
  EXPECT_THROW(detect_shift(few, 1e-3), Error);
}

TEST(ShiftDetector, StepDetectedWithinWindow) {
  const std::size_t window = 10;
  ShiftDetector d(window);
  for (int t = 0; t < 30; ++t) {
    d.observe(1e-4);
    if (d.ready()) EXPECT_FALSE(d.shifted(3e-3));
  }
  int detected = -1;
  for (int t = 0; t < 30 && detected < 0; ++t) {
    d.observe(2e-2);
    if (d.ready() && d.shifted(3e-3)) detected = t;
  }
  ASSERT_GE(detected, 0);
  EXPECT_LT(detected, static_cast<int>(window));
}

TEST(Adapt, ZeroBudget) {
  gcn::GcnModel m;
  MetaConfig cfg;
  cfg.adapt_steps_budget = 0;
  auto s = Samples(ChainGraph::series(3), 10, 1);
  Eigen::VectorXd theta = m.init_params(3);
  auto a = adapt_to_new_task(m, theta, s, cfg, 1e-3);
  EXPECT_EQ(a.theta, theta);
  EXPECT_EQ(a.diagnostics.loss.size(), 1u);
}

TEST(Adapt, TrainingTaskReplayConverges) {
  gcn::GcnModel m;
  MetaConfig cfg;
  cfg.meta_iterations = 150;
  auto pool = Pool(6, 40);
  auto r = meta_train(m, m.init_params(1), pool, cfg, 2);
  int reached = 0;
  for (const auto& t : pool) {
    auto a = adapt_to_new_task(m, r.theta, t.train, cfg, 1e-3, t.train, t.id);
    EXPECT_LE(a.diagnostics.loss.back(), a.diagnostics.loss.front()) << t.id;
    EXPECT_LE(a.diagnostics.steps_to_threshold, cfg.adapt_steps_budget);
    reached += a.diagnostics.steps_to_threshold >= 0;
  }
  EXPECT_GE(reached, 5);
}

TEST(Adapt, CsvRows) {
  AdaptationDiagnostics d{"x", {0.5, 0.25}, 1};
  std::vector<AdaptationDiagnostics> runs{d};
  std::ostringstream out;
  write_adaptation_csv(out, runs);
  EXPECT_EQ(out.str(), "task_id,step,loss\nx,0,0.5\nx,1,0.25\n");
}

TEST(Checkpoint, RoundTrip) {
  gcn::GcnModel m;
  Eigen::VectorXd theta = m.init_params(8);
  MetaConfig cfg;
  cfg.inner_steps = 3;
  std::vector<TaskManifestEntry> tasks{{"a", ChainGraph::series(2)},
                                       {"b", ChainGraph(4, {{0, 1}, {0, 2}, {1, 3}, {2, 3}})}};
  std::stringstream s;
  save_meta_checkpoint(s, m, theta, cfg, tasks);
  auto back = load_meta_checkpoint(s, m);
  EXPECT_EQ(back.theta, theta);
  EXPECT_EQ(back.config.inner_steps, 3);
  ASSERT_EQ(back.tasks.size(), 2u);
  EXPECT_EQ(back.tasks[1].graph, tasks[1].graph);
}

}  // namespace
}  // namespace sloscale::meta
