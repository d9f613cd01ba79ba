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

#include "sloscale/td3.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "../support/gradcheck.hpp"
#include "sloscale/error.hpp"

namespace sloscale::rl {
namespace {

using nn::RowMatrix;

TEST(Reward, QosShape) {
  EXPECT_EQ(reward_qos(20.0, 20.0), 1.0);
  EXPECT_EQ(reward_qos(5.0, 20.0), 1.0);
  EXPECT_NEAR(reward_qos(40.0, 20.0), std::exp(-1.0), 1e-12);
  EXPECT_LT(reward_qos(1e6, 20.0), 1e-300);
  EXPECT_THROW(reward_qos(1.0, 0.0), Error);
}

TEST(Reward, UtilizationPenalty) {
  std::vector<double> v{0.6, 0.3}, pref{0.6, 0.3};
  EXPECT_EQ(reward_util(v, pref), 1.0);
  std::vector<double> one{0.5}, pone{0.6};
  EXPECT_NEAR(reward_util(one, pone), 1.001, 1e-15);
  std::vector<double> two{0.5, 0.8}, ptwo{0.6, 0.6};
  EXPECT_NEAR(reward_util(two, ptwo), 1.0045, 1e-15);
}

TEST(Reward, Composition) {
  std::vector<double> rt{10, 20}, slo{10, 10}, v{0.5, 0.5}, pref{0.5, 0.5};
  EXPECT_NEAR(reward(rt, slo, v, pref), (1.0 + std::exp(-1.0)) / 2, 1e-15);
  std::vector<double> r1{20}, s1{20}, v1{0.7}, p1{0.7};
  EXPECT_EQ(reward(r1, s1, v1, p1), 1.0);
}

TEST(Reward, RandomRecomputation) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 1000; ++t) {
    std::size_t k = 1 + t % 4;
    std::vector<double> rt(k), slo(k), v(k), pref(k);
    double q = 0, pen = 0;
    for (std::size_t i = 0; i < k; ++i) {
      slo[i] = 5 + 50 * u(rng);
      rt[i] = slo[i] * 3 * u(rng);
      v[i] = u(rng);
      pref[i] = u(rng);
      double over = std::max(0.0, rt[i] - slo[i]) / slo[i];
      q += std::exp(-over * over);
      pen += std::pow(std::fabs(v[i] - pref[i]), 3);
    }
    EXPECT_NEAR(reward(rt, slo, v, pref), (q / k) / (1 + pen / k), 1e-12);
  }
}

TEST(Decode, Mapping) {
  Eigen::VectorXd a(2);
  a << 0.0, 0.0;
  auto d = decode_action(a, 2, 0.5);
  EXPECT_EQ(d[0].replica_delta, 0);
  EXPECT_EQ(d[0].tier_delta, 0);
  a << 1.0, 0.4;
  d = decode_action(a, 2, 0.5);
  EXPECT_EQ(d[0].replica_delta, 2);
  EXPECT_EQ(d[0].tier_delta, 0);
  a << -0.6, 0.6;
  d = decode_action(a, 2, 0.5);
  EXPECT_EQ(d[0].replica_delta, -1);
  EXPECT_EQ(d[0].tier_delta, 1);
  a << -3.0, -0.9;
  d = decode_action(a, 2, 0.5);
  EXPECT_EQ(d[0].replica_delta, -2);
  EXPECT_EQ(d[0].tier_delta, -1);
  a << 0.0, 1.0;
  EXPECT_EQ(decode_action(a, 2, 1.5)[0].tier_delta, 0);
}

TEST(State, ModesAndClamp) {
  ServiceObservation o;
  o.p99_ms = 30;
  o.slo_partial_ms = 10;
  o.e2e_slo_ms = 60;
  o.replicas = 3;
  o.max_replicas = 12;
  o.tier = 1;
  o.max_tier = 1;
  o.utilization = 0.4;
  o.predicted_load = 100;
  o.max_load = 200;
  std::vector<ServiceObservation> obs{o};
  Eigen::VectorXd p = build_state(obs, StateMode::kPartialSlo);
  ASSERT_EQ(p.size(), 6);
  EXPECT_EQ(p[0], 2.0);
  EXPECT_DOUBLE_EQ(p[1], 0.25);
  EXPECT_EQ(p[2], 1.0);
  EXPECT_DOUBLE_EQ(p[5], 10.0 / 60.0);
  Eigen::VectorXd q = build_state(obs, StateMode::kPlain);
  ASSERT_EQ(q.size(), 5);
  EXPECT_DOUBLE_EQ(q[0], 0.5);
}

struct Nets {
  int s = 4, a = 2;
  nn::Mlp actor = make_actor(4, 2, 16);
  nn::Mlp critic = make_critic(4, 2, 16);
  Eigen::VectorXd pa, pq1, pq2;
  Batch batch;
  Rng rng{7};

  Nets() {
    pa = actor.init_params(rng);
    pq1 = critic.init_params(rng);
    pq2 = critic.init_params(rng);
    std::uniform_real_distribution<double> u(-1, 1);
    const int n = 8;
    batch.states = RowMatrix(n, s);
    batch.next_states = RowMatrix(n, s);
    batch.actions = RowMatrix(n, a);
    batch.rewards = Eigen::VectorXd(n);
    batch.done = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < s; ++j) {
        batch.states(i, j) = u(rng);
        batch.next_states(i, j) = u(rng);
      }
      for (int j = 0; j < a; ++j) batch.actions(i, j) = u(rng);
      batch.rewards[i] = u(rng);
    }
    batch.done[3] = 1.0;
  }
};

TEST(SelectAction, GreedyAndNoiseless) {
  Nets n;
  Eigen::VectorXd s = n.batch.states.row(0).transpose();
  Rng r1(1), r2(2);
  Eigen::VectorXd mu = n.actor.forward(n.pa, s.transpose()).row(0).transpose();
  EXPECT_EQ(select_action(n.actor, n.pa, s, false, 0.5, r1), mu);
  EXPECT_EQ(select_action(n.actor, n.pa, s, true, 0.0, r2), mu);
}

TEST(SelectAction, AlwaysInRange) {
  Nets n;
  Rng r(3);
  Eigen::VectorXd s = n.batch.states.row(1).transpose();
  for (int i = 0; i < 10000; ++i) {
    Eigen::VectorXd a = select_action(n.actor, n.pa, s, true, 2.0, r);
    EXPECT_LE(a.cwiseAbs().maxCoeff(), 1.0);
  }
}

TEST(TargetAction, NoiseClipped) {
  Nets n;
  RowMatrix mu = n.actor.forward(n.pa, n.batch.next_states);
  Rng r(4);
  EXPECT_EQ(target_action(n.actor, n.pa, n.batch.next_states, 0.5, 0.0, r), mu);
  for (int i = 0; i < 1250; ++i) {
    RowMatrix a = target_action(n.actor, n.pa, n.batch.next_states, 0.2, 3.0, r);
    EXPECT_LE((a - mu).cwiseAbs().maxCoeff(), 0.2 + 1e-12);
    EXPECT_LE(a.cwiseAbs().maxCoeff(), 1.0);
  }
}

TEST(TargetQ, TerminalAndMin) {
  Nets n;
  RowMatrix next = n.actor.forward(n.pa, n.batch.next_states);
  Eigen::VectorXd y0 = target_q(n.critic, n.pq1, n.pq2, n.batch, next, 0.0);
  EXPECT_EQ(y0, n.batch.rewards);
  Eigen::VectorXd y = target_q(n.critic, n.pq1, n.pq2, n.batch, next, 0.9);
  EXPECT_EQ(y[3], n.batch.rewards[3]);

  Eigen::VectorXd higher = n.pq1;
  higher[static_cast<Eigen::Index>(n.critic.layout().tensors().back().offset)] += 1.0;
  RowMatrix in(next.rows(), 6);
  in << n.batch.next_states, next;
  Eigen::VectorXd q1 = n.critic.forward(n.pq1, in).col(0);
  Eigen::VectorXd ym = target_q(n.critic, n.pq1, higher, n.batch, next, 0.9);
  for (Eigen::Index i = 0; i < ym.size(); ++i) {
    double expect = n.batch.rewards[i] + 0.9 * (1 - n.batch.done[i]) * q1[i];
    EXPECT_NEAR(ym[i], expect, 1e-12);
  }
}

TEST(Critic, ZeroAtFixedPoint) {
  Nets n;
  RowMatrix in(n.batch.size(), 6);
  in << n.batch.states, n.batch.actions;
  Eigen::VectorXd y = n.critic.forward(n.pq1, in).col(0);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(n.pq1.size());
  EXPECT_EQ(critic_loss(n.critic, n.pq1, n.batch, y, &g), 0.0);
  EXPECT_EQ(g.norm(), 0.0);
}

TEST(Critic, FiniteDifferences) {
  Nets n;
  Eigen::VectorXd y = n.batch.rewards * 2.0;
  Eigen::VectorXd g = Eigen::VectorXd::Zero(n.pq1.size());
  critic_loss(n.critic, n.pq1, n.batch, y, &g);
  auto checks = testing::check_gradient(n.critic.layout(), n.pq1, g, [&](const Eigen::VectorXd& p) {
    return critic_loss(n.critic, p, n.batch, y, nullptr);
  });
  for (const auto& c : checks) EXPECT_LT(c.rel_error, 1e-4) << c.name;
}

TEST(Critic, StepDescends) {
  Nets n;
  Eigen::VectorXd y = n.batch.rewards;
  double before = critic_loss(n.critic, n.pq1, n.batch, y, nullptr);
  nn::Adam opt(static_cast<std::size_t>(n.pq1.size()), 1e-4);
  EXPECT_EQ(critic_update(n.critic, n.pq1, opt, n.batch, y), before);
  EXPECT_LT(critic_loss(n.critic, n.pq1, n.batch, y, nullptr), before);
}

TEST(Actor, FiniteDifferences) {
  Nets n;
  for (double l2 : {0.0, 0.3}) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(n.pa.size());
    actor_loss(n.actor, n.pa, n.critic, n.pq1, n.batch.states, &g, l2);
    auto checks = testing::check_gradient(n.actor.layout(), n.pa, g, [&](const Eigen::VectorXd& p) {
      return actor_loss(n.actor, p, n.critic, n.pq1, n.batch.states, nullptr, l2);
    });
    for (const auto& c : checks) EXPECT_LT(c.rel_error, 1e-4) << c.name << " l2=" << l2;
  }
}

TEST(Actor, FlatCriticLeavesActor) {
  Nets n;
  const auto& w0 = n.critic.layout()[0];
  for (int r = n.s; r < n.s + n.a; ++r)
    for (int c = 0; c < w0.cols; ++c) n.pq1[static_cast<Eigen::Index>(w0.offset + r * w0.cols + c)] = 0.0;
  Eigen::VectorXd before = n.pa;
  nn::Adam opt(static_cast<std::size_t>(n.pa.size()), 1e-3);
  actor_update(n.actor, n.pa, opt, n.critic, n.pq1, n.batch.states);
  EXPECT_EQ(n.pa, before);
}

TEST(Actor, StepRaisesQ) {
  Nets n;
  double before = actor_loss(n.actor, n.pa, n.critic, n.pq1, n.batch.states, nullptr);
  nn::Adam opt(static_cast<std::size_t>(n.pa.size()), 1e-4);
  actor_update(n.actor, n.pa, opt, n.critic, n.pq1, n.batch.states);
  EXPECT_LE(actor_loss(n.actor, n.pa, n.critic, n.pq1, n.batch.states, nullptr), before);
}

TEST(SoftUpdate, Limits) {
  Eigen::VectorXd t = Eigen::VectorXd::Constant(3, 1.0), s = Eigen::VectorXd::Constant(3, 5.0);
  Eigen::VectorXd a = t;
  soft_update(a, s, 0.0);
  EXPECT_EQ(a, s);
  Eigen::VectorXd b = t;
  soft_update(b, s, 1.0);
  EXPECT_EQ(b, t);
  Eigen::VectorXd c = t;
  soft_update(c, s, 0.995);
  soft_update(c, s, 0.995);
  const double k = 0.995 * 0.995;
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(c[i], k * 1.0 + (1 - k) * 5.0, 1e-14);
}

Transition Tr(double r) {
  Transition t;
  t.state = Eigen::VectorXd::Constant(2, r);
  t.action = Eigen::VectorXd::Constant(1, r);
  t.next_state = Eigen::VectorXd::Constant(2, r + 1);
  t.reward = r;
  return t;
}

TEST(Replay, FifoEviction) {
  ReplayBuffer b(3);
  for (int i = 0; i < 5; ++i) b.add(Tr(i));
  EXPECT_EQ(b.size(), 3u);
  EXPECT_EQ(b.at(0).reward, 2.0);
  EXPECT_EQ(b.at(2).reward, 4.0);
  EXPECT_THROW(b.add(Tr(std::numeric_limits<double>::infinity())), Error);
}

TEST(Replay, SampleDrawsStoredRows) {
  ReplayBuffer b(10);
  for (int i = 0; i < 6; ++i) b.add(Tr(i));
  Rng r(1);
  Batch batch = b.sample(50, r);
  ASSERT_EQ(batch.size(), 50);
  for (Eigen::Index i = 0; i < 50; ++i) {
    double v = batch.rewards[i];
    EXPECT_GE(v, 0);
    EXPECT_LE(v, 5);
    EXPECT_EQ(batch.states(i, 0), v);
    EXPECT_EQ(batch.next_states(i, 1), v + 1);
  }
}

// x' = x + 0.2 a on [-1, 1], reward 1 - x'^2.
class LineEnv final : public Environment {
 public:
  int state_dim() const override { return 1; }
  int action_dim() const override { return 1; }
  Eigen::VectorXd reset() override {
    x_ = 0.8;
    return Eigen::VectorXd::Constant(1, x_);
  }
  StepOutcome step(const Eigen::VectorXd& a) override {
    x_ = std::clamp(x_ + 0.2 * a[0], -1.0, 1.0);
    StepOutcome o;
    o.state = Eigen::VectorXd::Constant(1, x_);
    o.reward = 1.0 - x_ * x_;
    o.violations = std::abs(x_) > 0.5 ? 1 : 0;
    return o;
  }

 private:
  double x_ = 0.0;
};

Td3Config Small() {
  Td3Config c;
  c.hidden = 16;
  c.batch_size = 16;
  c.warmup = 32;
  return c;
}

TEST(Agent, UpdatesWaitForWarmup) {
  Td3Agent agent(1, 1, Small(), 3);
  for (int i = 0; i < 31; ++i) {
    agent.remember({Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1), 0.1 * i, Eigen::VectorXd::Zero(1), false});
    EXPECT_FALSE(agent.update().has_value());
  }
  agent.remember({Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1), 0.0, Eigen::VectorXd::Zero(1), false});
  auto first = agent.update();
  ASSERT_TRUE(first.has_value());
  EXPECT_FALSE(first->actor_loss.has_value());
  auto second = agent.update();
  EXPECT_TRUE(second->actor_loss.has_value());
}

TEST(Agent, ZeroLengthEpisode) {
  Td3Agent agent(1, 1, Small(), 3);
  LineEnv env;
  auto s = train_episode(env, agent, 0);
  EXPECT_EQ(s.steps, 0);
  EXPECT_EQ(s.episode_return, 0.0);
  EXPECT_EQ(agent.buffer().size(), 0u);
}

TEST(Agent, SeededRunsMatch) {
  std::vector<EpisodeStats> runs[2];
  for (auto& log : runs) {
    Td3Agent agent(1, 1, Small(), 11);
    LineEnv env;
    for (int e = 0; e < 4; ++e) log.push_back(train_episode(env, agent, 20, e));
  }
  std::ostringstream a, b;
  write_training_log(a, runs[0]);
  write_training_log(b, runs[1]);
  EXPECT_EQ(a.str(), b.str());
}

TEST(Agent, LearnsTheLine) {
  Td3Config c = Small();
  c.gamma = 0.9;
  c.tau = 0.95;
  c.preactivation_l2 = 0.1;
  Td3Agent agent(1, 1, c, 5);
  LineEnv env;
  for (int e = 0; e < 60; ++e) train_episode(env, agent, 25, e);
  auto greedy = evaluate_episode(env, agent, 25);
  EXPECT_GT(greedy.episode_return / greedy.steps, 0.8);
}

TEST(Agent, CheckpointRoundTrip) {
  Td3Agent a(3, 2, Small(), 1);
  std::stringstream s;
  a.save(s);
  Td3Agent b(3, 2, Small(), 99);
  b.load(s);
  EXPECT_EQ(a.actor_params(), b.actor_params());
  EXPECT_EQ(a.critic_params(1), b.critic_params(1));

  std::stringstream t;
  a.save(t);
  Td3Agent wrong(4, 2, Small(), 1);
  EXPECT_THROW(wrong.load(t), Error);
}

}  // namespace
}  // namespace sloscale::rl
