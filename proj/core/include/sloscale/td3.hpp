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

// Twin delayed deep deterministic policy gradient with the SLO-aware reward.
// Actor and critics are nn::Mlp networks; every update is written out by hand
// so the pieces can be checked in isolation.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sloscale/nn.hpp"
#include "sloscale/sim.hpp"

namespace sloscale::rl {

using Rng = std::mt19937_64;

// 1 when rt is within slo, exp(-((rt - slo) / slo)^2) otherwise.
double reward_qos(double rt_ms, double slo_ms);
// 1 + mean over services of |v_pref - v|^3 (one resource type).
double reward_util(std::span<const double> utilization, std::span<const double> preferred);
// Mean per-service reward_qos divided by reward_util.
double reward(std::span<const double> rt_ms, std::span<const double> slo_ms, std::span<const double> utilization,
              std::span<const double> preferred);

struct ServiceObservation {
  double p99_ms = 0.0;
  double slo_partial_ms = 1.0;
  double e2e_slo_ms = 1.0;
  int replicas = 0;
  int max_replicas = 1;
  int tier = 0;
  int max_tier = 0;
  double utilization = 0.0;
  double predicted_load = 0.0;
  double max_load = 1.0;
};

enum class StateMode {
  kPartialSlo,  // latency against the partial SLO, plus the partial SLO share
  kPlain,       // latency against the end-to-end SLO, no partial SLO
};

int features_per_service(StateMode mode);
// Flattened per-service features, each clamped to [0, 2].
Eigen::VectorXd build_state(std::span<const ServiceObservation> services, StateMode mode);

// Per service (h, v): replica delta round(h * max_delta), tier delta from a
// dead zone on v. Components are clamped to [-1, 1] first.
std::vector<sim::ScalingDecision> decode_action(const Eigen::VectorXd& action, int max_delta, double dead_zone);

struct Transition {
  Eigen::VectorXd state;
  Eigen::VectorXd action;
  double reward = 0.0;
  Eigen::VectorXd next_state;
  bool done = false;
};

struct Batch {
  nn::RowMatrix states;
  nn::RowMatrix actions;
  Eigen::VectorXd rewards;
  nn::RowMatrix next_states;
  Eigen::VectorXd done;  // 0 or 1

  Eigen::Index size() const { return rewards.size(); }
};

class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void add(Transition t);  // evicts the oldest entry when full
  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  const Transition& at(std::size_t i) const;  // 0 = oldest
  // Uniform with replacement.
  Batch sample(std::size_t n, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;  // index of the oldest entry once full
  std::size_t size_ = 0;
  std::vector<Transition> data_;
};

struct Td3Config {
  double gamma = 0.99;
  double tau = 0.995;  // share of the old target kept by soft_update
  double target_noise_std = 0.1;
  double target_noise_clip = 0.5;  // delta
  double exploration_std = 0.1;
  int policy_update = 2;
  int batch_size = 64;
  std::size_t buffer_capacity = 100000;
  int hidden = 64;
  double actor_lr = 1e-3;
  double critic_lr = 1e-3;
  int warmup = 64;  // uniform random actions until this many transitions are stored
  double preactivation_l2 = 0.0;  // actor penalty that keeps tanh out of saturation
};

void validate(const Td3Config& config);

nn::Mlp make_actor(int state_dim, int action_dim, int hidden);
nn::Mlp make_critic(int state_dim, int action_dim, int hidden);

// mu(s), plus N(0, noise_std) per component when explore, clamped to [-1, 1].
Eigen::VectorXd select_action(const nn::Mlp& actor, const Eigen::VectorXd& params, const Eigen::VectorXd& state,
                              bool explore, double noise_std, Rng& rng);

// mu'(s') plus noise clipped to [-delta, delta], clamped to [-1, 1]. One row
// per state.
nn::RowMatrix target_action(const nn::Mlp& actor, const Eigen::VectorXd& target_params,
                            const nn::RowMatrix& next_states, double delta, double noise_std, Rng& rng);

// r + gamma (1 - d) min(Q1'(s', a'), Q2'(s', a')).
Eigen::VectorXd target_q(const nn::Mlp& critic, const Eigen::VectorXd& q1_target, const Eigen::VectorXd& q2_target,
                         const Batch& batch, const nn::RowMatrix& next_actions, double gamma);

// Mean squared error of Q(s, a) against y; adds its gradient into grad.
double critic_loss(const nn::Mlp& critic, const Eigen::VectorXd& params, const Batch& batch,
                   const Eigen::VectorXd& y, Eigen::VectorXd* grad);

// -mean Q1(s, mu(s)) plus preactivation_l2 times the mean squared norm of
// the actor's pre-tanh output; adds its gradient w.r.t. the actor parameters
// into grad.
double actor_loss(const nn::Mlp& actor, const Eigen::VectorXd& actor_params, const nn::Mlp& critic,
                  const Eigen::VectorXd& critic_params, const nn::RowMatrix& states, Eigen::VectorXd* grad,
                  double preactivation_l2 = 0.0);

// One optimizer step on the critic; returns the loss before the step.
double critic_update(const nn::Mlp& critic, Eigen::VectorXd& params, nn::Adam& optimizer, const Batch& batch,
                     const Eigen::VectorXd& y);
double actor_update(const nn::Mlp& actor, Eigen::VectorXd& actor_params, nn::Adam& optimizer,
                    const nn::Mlp& critic, const Eigen::VectorXd& critic_params, const nn::RowMatrix& states,
                    double preactivation_l2 = 0.0);

// target <- tau * target + (1 - tau) * source.
void soft_update(Eigen::VectorXd& target, const Eigen::VectorXd& source, double tau);

struct UpdateStats {
  double critic_loss = 0.0;  // mean of both critics
  std::optional<double> actor_loss;
};

class Td3Agent {
 public:
  Td3Agent(int state_dim, int action_dim, Td3Config config, std::uint64_t seed);

  int state_dim() const { return state_dim_; }
  int action_dim() const { return action_dim_; }
  const Td3Config& config() const { return config_; }

  // Exploring actions are uniform during warmup, then mu(s) plus noise.
  Eigen::VectorXd act(const Eigen::VectorXd& state, bool explore);
  void remember(Transition t) { buffer_.add(std::move(t)); }
  // No-op (nullopt) until the buffer holds max(batch_size, warmup)
  // transitions. Throws Error(kNumericFailure) on a non-finite loss.
  std::optional<UpdateStats> update();

  const ReplayBuffer& buffer() const { return buffer_; }
  long updates() const { return updates_; }

  const nn::Mlp& actor() const { return actor_; }
  const nn::Mlp& critic() const { return critic_; }
  const Eigen::VectorXd& actor_params() const { return actor_params_; }
  const Eigen::VectorXd& critic_params(int i) const { return i == 0 ? q1_params_ : q2_params_; }

  void save(std::ostream& out) const;
  // Restores the networks of a checkpoint written by save; the agent must
  // have the same dimensions. Optimizer state starts fresh.
  void load(std::istream& in);

 private:
  int state_dim_;
  int action_dim_;
  Td3Config config_;
  Rng rng_;
  nn::Mlp actor_;
  nn::Mlp critic_;
  Eigen::VectorXd actor_params_, actor_target_;
  Eigen::VectorXd q1_params_, q1_target_;
  Eigen::VectorXd q2_params_, q2_target_;
  nn::Adam actor_opt_, q1_opt_, q2_opt_;
  ReplayBuffer buffer_;
  long updates_ = 0;
};

inline constexpr const char* kAgentCheckpointHeader = "sloscale-td3-checkpoint v1";

struct StepOutcome {
  Eigen::VectorXd state;
  double reward = 0.0;
  bool done = false;
  int violations = 0;
  double normalized_cost = 0.0;
};

class Environment {
 public:
  virtual ~Environment() = default;
  virtual int state_dim() const = 0;
  virtual int action_dim() const = 0;
  virtual Eigen::VectorXd reset() = 0;
  virtual StepOutcome step(const Eigen::VectorXd& action) = 0;
};

struct EpisodeStats {
  int episode = 0;
  int steps = 0;
  double episode_return = 0.0;
  int violations = 0;
  double mean_cost = 0.0;
  double critic_loss = 0.0;  // mean over updates in the episode
  double actor_loss = 0.0;
};

// Runs until the environment reports done or max_steps ticks elapse, acting
// with exploration and updating after every tick when learn is set.
EpisodeStats train_episode(Environment& env, Td3Agent& agent, int max_steps, int episode = 0, bool learn = true);
// Greedy rollout without learning.
EpisodeStats evaluate_episode(Environment& env, Td3Agent& agent, int max_steps, int episode = 0);

// Header "episode,return,violations,cost,critic_loss,actor_loss".
void write_training_log(std::ostream& out, std::span<const EpisodeStats> episodes);

}  // namespace sloscale::rl
