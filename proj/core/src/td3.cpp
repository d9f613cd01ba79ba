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

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "sloscale/error.hpp"

namespace sloscale::rl {

double reward_qos(double rt_ms, double slo_ms) {
  if (!(slo_ms > 0.0)) throw Error(ErrorCode::kInvalidArgument, "reward_qos: slo must be positive");
  if (rt_ms <= slo_ms) return 1.0;
  const double z = (rt_ms - slo_ms) / slo_ms;
  return std::exp(-z * z);
}

double reward_util(std::span<const double> utilization, std::span<const double> preferred) {
  if (utilization.size() != preferred.size() || utilization.empty()) {
    throw Error(ErrorCode::kShapeMismatch, "reward_util: one preferred utilization per service");
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < utilization.size(); ++k) {
    const double d = std::abs(preferred[k] - utilization[k]);
    sum += d * d * d;
  }
  return 1.0 + sum / static_cast<double>(utilization.size());
}

double reward(std::span<const double> rt_ms, std::span<const double> slo_ms, std::span<const double> utilization,
              std::span<const double> preferred) {
  if (rt_ms.size() != slo_ms.size() || rt_ms.empty()) {
    throw Error(ErrorCode::kShapeMismatch, "reward: one SLO per response time");
  }
  double qos = 0.0;
  for (std::size_t k = 0; k < rt_ms.size(); ++k) qos += reward_qos(rt_ms[k], slo_ms[k]);
  qos /= static_cast<double>(rt_ms.size());
  return qos / reward_util(utilization, preferred);
}

int features_per_service(StateMode mode) { return mode == StateMode::kPartialSlo ? 6 : 5; }

Eigen::VectorXd build_state(std::span<const ServiceObservation> services, StateMode mode) {
  const int f = features_per_service(mode);
  Eigen::VectorXd s(static_cast<Eigen::Index>(services.size()) * f);
  auto clamp = [](double v) { return std::isfinite(v) ? std::clamp(v, 0.0, 2.0) : 2.0; };
  Eigen::Index j = 0;
  for (const auto& o : services) {
    const double slo = mode == StateMode::kPartialSlo ? o.slo_partial_ms : o.e2e_slo_ms;
    s[j++] = clamp(o.p99_ms / slo);
    s[j++] = clamp(static_cast<double>(o.replicas) / std::max(1, o.max_replicas));
    s[j++] = o.max_tier > 0 ? clamp(static_cast<double>(o.tier) / o.max_tier) : 0.0;
    s[j++] = clamp(o.utilization);
    s[j++] = clamp(o.predicted_load / o.max_load);
    if (mode == StateMode::kPartialSlo) s[j++] = clamp(o.slo_partial_ms / o.e2e_slo_ms);
  }
  return s;
}

std::vector<sim::ScalingDecision> decode_action(const Eigen::VectorXd& action, int max_delta, double dead_zone) {
  if (action.size() % 2 != 0) throw Error(ErrorCode::kShapeMismatch, "decode_action: expects (h, v) per service");
  std::vector<sim::ScalingDecision> out(static_cast<std::size_t>(action.size() / 2));
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double h = std::clamp(action[static_cast<Eigen::Index>(2 * k)], -1.0, 1.0);
    const double v = std::clamp(action[static_cast<Eigen::Index>(2 * k + 1)], -1.0, 1.0);
    out[k].replica_delta = static_cast<int>(std::lround(h * max_delta));
    out[k].tier_delta = std::abs(v) < dead_zone ? 0 : (v > 0.0 ? 1 : -1);
  }
  return out;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw Error(ErrorCode::kInvalidArgument, "ReplayBuffer: capacity must be positive");
}

void ReplayBuffer::add(Transition t) {
  if (!std::isfinite(t.reward)) throw Error(ErrorCode::kNumericFailure, "ReplayBuffer: non-finite reward");
  if (size_ < capacity_) {
    data_.push_back(std::move(t));
    ++size_;
    return;
  }
  data_[head_] = std::move(t);
  head_ = (head_ + 1) % capacity_;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= size_) throw Error(ErrorCode::kInvalidArgument, "ReplayBuffer: index out of range");
  return data_[(head_ + i) % capacity_];
}

Batch ReplayBuffer::sample(std::size_t n, Rng& rng) const {
  if (size_ == 0) throw Error(ErrorCode::kInvalidArgument, "ReplayBuffer: sampling an empty buffer");
  const auto& first = data_.front();
  const auto sd = first.state.size();
  const auto ad = first.action.size();
  const auto rows = static_cast<Eigen::Index>(n);
  Batch b{nn::RowMatrix(rows, sd), nn::RowMatrix(rows, ad), Eigen::VectorXd(rows), nn::RowMatrix(rows, sd),
          Eigen::VectorXd(rows)};
  std::uniform_int_distribution<std::size_t> pick(0, size_ - 1);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Transition& t = data_[pick(rng)];
    b.states.row(r) = t.state.transpose();
    b.actions.row(r) = t.action.transpose();
    b.rewards[r] = t.reward;
    b.next_states.row(r) = t.next_state.transpose();
    b.done[r] = t.done ? 1.0 : 0.0;
  }
  return b;
}

void validate(const Td3Config& c) {
  if (!(c.gamma >= 0.0 && c.gamma < 1.0)) throw Error(ErrorCode::kConfigInvalid, "td3: gamma must lie in [0, 1)");
  if (!(c.tau >= 0.0 && c.tau <= 1.0)) throw Error(ErrorCode::kConfigInvalid, "td3: tau must lie in [0, 1]");
  if (c.policy_update < 1) throw Error(ErrorCode::kConfigInvalid, "td3: policy_update must be >= 1");
  if (c.batch_size < 1 || c.buffer_capacity < 1 || c.hidden < 1) {
    throw Error(ErrorCode::kConfigInvalid, "td3: batch, buffer and hidden sizes must be positive");
  }
  if (c.target_noise_std < 0.0 || c.target_noise_clip < 0.0 || c.exploration_std < 0.0) {
    throw Error(ErrorCode::kConfigInvalid, "td3: noise parameters must be non-negative");
  }
  if (!(c.actor_lr > 0.0) || !(c.critic_lr > 0.0)) throw Error(ErrorCode::kConfigInvalid, "td3: learning rates must be positive");
  if (!(c.preactivation_l2 >= 0.0)) throw Error(ErrorCode::kConfigInvalid, "td3: preactivation_l2 must be non-negative");
}

nn::Mlp make_actor(int state_dim, int action_dim, int hidden) {
  return nn::Mlp({state_dim, hidden, hidden, action_dim}, nn::Activation::kTanh);
}

nn::Mlp make_critic(int state_dim, int action_dim, int hidden) {
  return nn::Mlp({state_dim + action_dim, hidden, hidden, 1}, nn::Activation::kIdentity);
}

Eigen::VectorXd select_action(const nn::Mlp& actor, const Eigen::VectorXd& params, const Eigen::VectorXd& state,
                              bool explore, double noise_std, Rng& rng) {
  nn::RowMatrix a = actor.forward(params, state.transpose());
  Eigen::VectorXd out = a.row(0).transpose();
  if (explore && noise_std > 0.0) {
    std::normal_distribution<double> noise(0.0, noise_std);
    for (Eigen::Index i = 0; i < out.size(); ++i) out[i] += noise(rng);
  }
  return out.cwiseMax(-1.0).cwiseMin(1.0);
}

nn::RowMatrix target_action(const nn::Mlp& actor, const Eigen::VectorXd& target_params,
                            const nn::RowMatrix& next_states, double delta, double noise_std, Rng& rng) {
  nn::RowMatrix a = actor.forward(target_params, next_states);
  if (noise_std > 0.0) {
    std::normal_distribution<double> noise(0.0, noise_std);
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
      for (Eigen::Index c = 0; c < a.cols(); ++c) a(r, c) += std::clamp(noise(rng), -delta, delta);
    }
  }
  return a.cwiseMax(-1.0).cwiseMin(1.0);
}

namespace {

nn::RowMatrix join(const nn::RowMatrix& s, const nn::RowMatrix& a) {
  nn::RowMatrix x(s.rows(), s.cols() + a.cols());
  x << s, a;
  return x;
}

void require_finite(double value, const char* what) {
  if (!std::isfinite(value)) {
    spdlog::error("td3: non-finite {} ({})", what, value);
    throw Error(ErrorCode::kNumericFailure, fmt::format("td3: non-finite {}", what));
  }
}

}  // namespace

Eigen::VectorXd target_q(const nn::Mlp& critic, const Eigen::VectorXd& q1_target, const Eigen::VectorXd& q2_target,
                         const Batch& batch, const nn::RowMatrix& next_actions, double gamma) {
  const nn::RowMatrix x = join(batch.next_states, next_actions);
  const Eigen::VectorXd q1 = critic.forward(q1_target, x).col(0);
  const Eigen::VectorXd q2 = critic.forward(q2_target, x).col(0);
  return batch.rewards.array() + gamma * (1.0 - batch.done.array()) * q1.cwiseMin(q2).array();
}

double critic_loss(const nn::Mlp& critic, const Eigen::VectorXd& params, const Batch& batch,
                   const Eigen::VectorXd& y, Eigen::VectorXd* grad) {
  nn::Mlp::Cache cache;
  const Eigen::VectorXd q = critic.forward(params, join(batch.states, batch.actions), &cache).col(0);
  const Eigen::VectorXd diff = q - y;
  const double n = static_cast<double>(batch.size());
  if (grad) {
    nn::RowMatrix dq = (2.0 / n) * diff;
    critic.backward(params, cache, dq, grad);
  }
  return diff.squaredNorm() / n;
}

double actor_loss(const nn::Mlp& actor, const Eigen::VectorXd& actor_params, const nn::Mlp& critic,
                  const Eigen::VectorXd& critic_params, const nn::RowMatrix& states, Eigen::VectorXd* grad,
                  double preactivation_l2) {
  nn::Mlp::Cache actor_cache;
  nn::Mlp::Cache critic_cache;
  const nn::RowMatrix a = actor.forward(actor_params, states, &actor_cache);
  const nn::RowMatrix q = critic.forward(critic_params, join(states, a), &critic_cache);
  const double n = static_cast<double>(states.rows());
  const nn::RowMatrix& z = actor_cache.pre.back();
  if (grad) {
    nn::RowMatrix dq = nn::RowMatrix::Constant(states.rows(), 1, -1.0 / n);
    const nn::RowMatrix dx = critic.backward(critic_params, critic_cache, dq, nullptr);
    const nn::RowMatrix da = dx.rightCols(a.cols());
    if (preactivation_l2 > 0.0) {
      const nn::RowMatrix dz = (2.0 * preactivation_l2 / n) * z;
      actor.backward(actor_params, actor_cache, da, grad, &dz);
    } else {
      actor.backward(actor_params, actor_cache, da, grad);
    }
  }
  return -q.sum() / n + preactivation_l2 * z.squaredNorm() / n;
}

double critic_update(const nn::Mlp& critic, Eigen::VectorXd& params, nn::Adam& optimizer, const Batch& batch,
                     const Eigen::VectorXd& y) {
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(params.size());
  const double loss = critic_loss(critic, params, batch, y, &grad);
  require_finite(loss, "critic loss");
  optimizer.step(params, grad);
  return loss;
}

double actor_update(const nn::Mlp& actor, Eigen::VectorXd& actor_params, nn::Adam& optimizer,
                    const nn::Mlp& critic, const Eigen::VectorXd& critic_params, const nn::RowMatrix& states,
                    double preactivation_l2) {
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(actor_params.size());
  const double loss = actor_loss(actor, actor_params, critic, critic_params, states, &grad, preactivation_l2);
  require_finite(loss, "actor loss");
  optimizer.step(actor_params, grad);
  return loss;
}

void soft_update(Eigen::VectorXd& target, const Eigen::VectorXd& source, double tau) {
  if (target.size() != source.size()) throw Error(ErrorCode::kShapeMismatch, "soft_update: size mismatch");
  target = tau * target + (1.0 - tau) * source;
}

Td3Agent::Td3Agent(int state_dim, int action_dim, Td3Config config, std::uint64_t seed)
    : state_dim_(state_dim),
      action_dim_(action_dim),
      config_(config),
      rng_(seed),
      buffer_(std::max<std::size_t>(config.buffer_capacity, 1)) {
  validate(config_);
  if (state_dim < 1 || action_dim < 1) throw Error(ErrorCode::kInvalidArgument, "Td3Agent: empty state or action");
  actor_ = make_actor(state_dim, action_dim, config_.hidden);
  critic_ = make_critic(state_dim, action_dim, config_.hidden);
  actor_params_ = actor_.init_params(rng_);
  q1_params_ = critic_.init_params(rng_);
  q2_params_ = critic_.init_params(rng_);
  actor_target_ = actor_params_;
  q1_target_ = q1_params_;
  q2_target_ = q2_params_;
  actor_opt_ = nn::Adam(static_cast<std::size_t>(actor_params_.size()), config_.actor_lr);
  q1_opt_ = nn::Adam(static_cast<std::size_t>(q1_params_.size()), config_.critic_lr);
  q2_opt_ = nn::Adam(static_cast<std::size_t>(q2_params_.size()), config_.critic_lr);
}

Eigen::VectorXd Td3Agent::act(const Eigen::VectorXd& state, bool explore) {
  if (state.size() != state_dim_) throw Error(ErrorCode::kShapeMismatch, "Td3Agent::act: state size");
  if (explore && buffer_.size() < static_cast<std::size_t>(config_.warmup)) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::VectorXd a(action_dim_);
    for (Eigen::Index i = 0; i < a.size(); ++i) a[i] = u(rng_);
    return a;
  }
  return select_action(actor_, actor_params_, state, explore, config_.exploration_std, rng_);
}

std::optional<UpdateStats> Td3Agent::update() {
  const auto ready = static_cast<std::size_t>(std::max(config_.batch_size, config_.warmup));
  if (buffer_.size() < ready) return std::nullopt;
  const Batch batch = buffer_.sample(static_cast<std::size_t>(config_.batch_size), rng_);
  const nn::RowMatrix next_actions =
      target_action(actor_, actor_target_, batch.next_states, config_.target_noise_clip, config_.target_noise_std, rng_);
  const Eigen::VectorXd y = target_q(critic_, q1_target_, q2_target_, batch, next_actions, config_.gamma);
  UpdateStats stats;
  stats.critic_loss = 0.5 * (critic_update(critic_, q1_params_, q1_opt_, batch, y) +
                             critic_update(critic_, q2_params_, q2_opt_, batch, y));
  ++updates_;
  if (updates_ % config_.policy_update == 0) {
    stats.actor_loss = actor_update(actor_, actor_params_, actor_opt_, critic_, q1_params_, batch.states,
                                    config_.preactivation_l2);
    soft_update(actor_target_, actor_params_, config_.tau);
    soft_update(q1_target_, q1_params_, config_.tau);
    soft_update(q2_target_, q2_params_, config_.tau);
  }
  return stats;
}

void Td3Agent::save(std::ostream& out) const {
  out << kAgentCheckpointHeader << '\n';
  out << "dims state " << state_dim_ << " action " << action_dim_ << " hidden " << config_.hidden << '\n';
  const std::pair<const char*, const Eigen::VectorXd*> actors[] = {{"actor", &actor_params_},
                                                                   {"actor_target", &actor_target_}};
  const std::pair<const char*, const Eigen::VectorXd*> critics[] = {
      {"critic1", &q1_params_}, {"critic1_target", &q1_target_}, {"critic2", &q2_params_}, {"critic2_target", &q2_target_}};
  for (const auto& [name, params] : actors) {
    out << "network " << name << '\n';
    nn::write_tensors(out, actor_.layout(), *params);
  }
  for (const auto& [name, params] : critics) {
    out << "network " << name << '\n';
    nn::write_tensors(out, critic_.layout(), *params);
  }
}

void Td3Agent::load(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kAgentCheckpointHeader) {
    throw Error(ErrorCode::kShapeMismatch, "agent checkpoint: unsupported header");
  }
  std::string w1, w2, w3, w4;
  int s = 0, a = 0, h = 0;
  if (!(in >> w1 >> w2 >> s >> w3 >> a >> w4 >> h) || w1 != "dims" || s != state_dim_ || a != action_dim_ ||
      h != config_.hidden) {
    throw Error(ErrorCode::kShapeMismatch, "agent checkpoint: dimensions differ from the agent");
  }
  auto read = [&](const char* name, const nn::Mlp& net) {
    std::string word, got;
    if (!(in >> word >> got) || word != "network" || got != name) {
      throw Error(ErrorCode::kShapeMismatch, fmt::format("agent checkpoint: expected network {}", name));
    }
    std::getline(in, line);
    return nn::read_tensors(in, net.layout());
  };
  Eigen::VectorXd actor = read("actor", actor_);
  Eigen::VectorXd actor_target = read("actor_target", actor_);
  Eigen::VectorXd q1 = read("critic1", critic_);
  Eigen::VectorXd q1_target = read("critic1_target", critic_);
  Eigen::VectorXd q2 = read("critic2", critic_);
  Eigen::VectorXd q2_target = read("critic2_target", critic_);
  actor_params_ = std::move(actor);
  actor_target_ = std::move(actor_target);
  q1_params_ = std::move(q1);
  q1_target_ = std::move(q1_target);
  q2_params_ = std::move(q2);
  q2_target_ = std::move(q2_target);
  actor_opt_ = nn::Adam(static_cast<std::size_t>(actor_params_.size()), config_.actor_lr);
  q1_opt_ = nn::Adam(static_cast<std::size_t>(q1_params_.size()), config_.critic_lr);
  q2_opt_ = nn::Adam(static_cast<std::size_t>(q2_params_.size()), config_.critic_lr);
}

namespace {

EpisodeStats rollout(Environment& env, Td3Agent& agent, int max_steps, int episode, bool explore, bool learn) {
  EpisodeStats stats;
  stats.episode = episode;
  if (max_steps <= 0) return stats;
  Eigen::VectorXd state = env.reset();
  int critic_updates = 0;
  int actor_updates = 0;
  double cost = 0.0;
  for (int t = 0; t < max_steps; ++t) {
    Eigen::VectorXd action = agent.act(state, explore);
    StepOutcome out = env.step(action);
    stats.episode_return += out.reward;
    stats.violations += out.violations;
    cost += out.normalized_cost;
    ++stats.steps;
    if (learn) {
      agent.remember({state, action, out.reward, out.state, out.done});
      if (auto u = agent.update()) {
        stats.critic_loss += u->critic_loss;
        ++critic_updates;
        if (u->actor_loss) {
          stats.actor_loss += *u->actor_loss;
          ++actor_updates;
        }
      }
    }
    state = std::move(out.state);
    if (out.done) break;
  }
  stats.mean_cost = cost / stats.steps;
  if (critic_updates > 0) stats.critic_loss /= critic_updates;
  if (actor_updates > 0) stats.actor_loss /= actor_updates;
  return stats;
}

}  // namespace

EpisodeStats train_episode(Environment& env, Td3Agent& agent, int max_steps, int episode, bool learn) {
  return rollout(env, agent, max_steps, episode, true, learn);
}

EpisodeStats evaluate_episode(Environment& env, Td3Agent& agent, int max_steps, int episode) {
  return rollout(env, agent, max_steps, episode, false, false);
}

void write_training_log(std::ostream& out, std::span<const EpisodeStats> episodes) {
  out << "episode,return,violations,cost,critic_loss,actor_loss\n";
  for (const auto& e : episodes) {
    out << fmt::format("{},{:.10g},{},{:.10g},{:.10g},{:.10g}\n", e.episode, e.episode_return, e.violations,
                       e.mean_cost, e.critic_loss, e.actor_loss);
  }
}

}  // namespace sloscale::rl
