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

// The closed control loop: monitor the simulated cluster, re-derive partial
// SLOs when profiles change or a service is resized, forecast load, ask the
// agent for a scaling action and actuate it.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sloscale/error.hpp"
#include "sloscale/forecaster.hpp"
#include "sloscale/gcn.hpp"
#include "sloscale/meta_learner.hpp"
#include "sloscale/scenario.hpp"
#include "sloscale/sim.hpp"
#include "sloscale/td3.hpp"

namespace sloscale::orch {

enum class Variant {
  kPartialSlo,  // partial SLOs from the meta-learned allocator in state and reward
  kPlain,       // end-to-end SLO only
};

const char* variant_name(Variant v);
// Throws Error(kConfigInvalid).
Variant parse_variant(const std::string& name);

enum class EventKind { kLlpChanged, kVerticalScaled, kPeriodic, kReallocation };
const char* event_kind_name(EventKind k);

struct EventRecord {
  std::int64_t tick = 0;
  EventKind kind = EventKind::kPeriodic;
  std::vector<int> services;
  std::vector<int> chains;       // reallocations only
  std::vector<int> adapt_steps;  // per reallocated chain
  std::vector<double> adapt_loss;
};

struct ServiceTick {
  int replicas = 0;
  int tier = 0;
  double offered_load = 0.0;
  double forecast_load = 0.0;
  double utilization = 0.0;
  double p99_ms = 0.0;
  double slo_partial_ms = 0.0;  // NaN in the plain variant
};

struct TickRecord {
  std::int64_t tick = 0;
  std::vector<double> arrivals;  // per chain
  std::vector<double> chain_p99_ms;
  std::vector<int> chain_violation;
  std::vector<ServiceTick> services;
  double cost_cores = 0.0;
  double normalized_cost = 0.0;
  double reward = 0.0;  // NaN on the first tick, which follows no action
};

struct RunReport {
  std::string scenario;
  std::string variant;
  std::uint64_t seed = 0;
  std::vector<std::string> service_names;
  std::vector<std::string> chain_names;
  std::vector<TickRecord> ticks;
  std::vector<EventRecord> events;
  bool complete = true;
  std::optional<ErrorCode> error_code;
  std::string error;
};

struct RunSummary {
  int ticks = 0;
  double violation_rate = 0.0;  // violating chain-ticks over chain-ticks
  double mean_normalized_cost = 0.0;
  int reallocations = 0;
  double mean_adaptation_steps = 0.0;
  double total_reward = 0.0;
};

RunSummary summarize(const RunReport& report);

void write_metrics_csv(std::ostream& out, const RunReport& report);
void write_events_csv(std::ostream& out, const RunReport& report);
void write_summary(std::ostream& out, const RunReport& report);

struct Comparison {
  RunSummary a;
  RunSummary b;
  double violation_rate_delta = 0.0;  // a - b
  double cost_delta = 0.0;
  double adaptation_steps_delta = 0.0;
};

Comparison compare_runs(const RunReport& a, const RunReport& b);
void write_comparison(std::ostream& out, const Comparison& c, const std::string& label_a, const std::string& label_b);

// The cluster as an RL environment. One episode covers scenario.horizon
// ticks; reset simulates tick 0 and each step one more tick.
class ClusterEnv final : public rl::Environment {
 public:
  // meta_theta parameterizes the GCN allocator; it is required for the
  // partial-SLO variant and ignored for the plain one.
  ClusterEnv(const Scenario& scenario, Variant variant, std::uint64_t seed, Eigen::VectorXd meta_theta = {});

  // Training episodes jitter the mutation factors (and optionally the
  // initial replica counts) per episode; evaluation replays the script.
  void set_training(bool training) { training_ = training; }

  int state_dim() const override;
  int action_dim() const override { return 2 * static_cast<int>(scenario_.services.size()); }
  Eigen::VectorXd reset() override;
  rl::StepOutcome step(const Eigen::VectorXd& action) override;

  bool done() const;
  const RunReport& report() const { return report_; }
  const sim::ClusterState& cluster() const { return state_; }
  int allocator_runs() const { return allocator_runs_; }
  // Current partial SLO per service (empty in the plain variant).
  const std::vector<double>& slo_partial() const { return slo_partial_; }

 private:
  struct Events {
    std::vector<int> llp_changed;
    std::vector<int> vertical;
    std::vector<int> periodic;
  };

  void simulate_and_monitor(bool startup);
  void reallocate(const std::vector<int>& chains, std::int64_t tick);
  oracle::AllocationProblem chain_problem(int chain, double load) const;
  void update_slo_partial();
  // Loss of the chain's current allocator against the oracle at this load.
  double chain_allocation_error(int chain, double load);
  Eigen::VectorXd observe() const;
  double compute_reward(const sim::TickMetrics& m) const;

  Scenario scenario_;
  Variant variant_;
  std::uint64_t seed_;
  bool training_ = false;
  int episode_ = -1;
  gcn::GcnModel gcn_;
  Eigen::VectorXd meta_theta_;
  std::vector<Eigen::VectorXd> chain_theta_;
  std::vector<meta::ShiftDetector> detectors_;
  std::vector<forecast::Forecaster> forecasters_;
  std::vector<double> forecast_;  // per chain, next tick
  std::vector<double> max_load_;  // per service
  std::vector<double> e2e_slo_;   // per service, tightest chain
  std::vector<sim::Mutation> schedule_;
  std::optional<Workload> workload_;
  std::optional<sim::Simulator> simulator_;
  sim::ClusterState state_;
  sim::TickMetrics last_;
  std::vector<double> slo_partial_;
  RunReport report_;
  int allocator_runs_ = 0;
  int realloc_counter_ = 0;
};

enum class RunMode { kTrain, kEval };

// Trains agent on the scenario for scenario.training.episodes episodes and
// returns the per-episode log.
std::vector<rl::EpisodeStats> train_agent(const Scenario& scenario, Variant variant, const Eigen::VectorXd& meta_theta,
                                          rl::Td3Agent& agent, std::uint64_t seed);

// Greedy episode on the scripted scenario. Errors raised inside the loop end
// the run early; the returned report then carries the error.
RunReport evaluate(const Scenario& scenario, Variant variant, const Eigen::VectorXd& meta_theta, rl::Td3Agent& agent,
                   std::uint64_t seed);

// kTrain trains agent first (log receives the episodes), then evaluates.
RunReport run(const Scenario& scenario, RunMode mode, Variant variant, std::uint64_t seed,
              const Eigen::VectorXd& meta_theta, rl::Td3Agent& agent, std::vector<rl::EpisodeStats>* log = nullptr);

// State size of the environment built from scenario and variant.
int state_dim(const Scenario& scenario, Variant variant);

// Labelled, split tasks of the scenario's task suite (training pool or
// held-out set).
std::vector<meta::Task> build_tasks(const Scenario& scenario, bool held_out, std::uint64_t seed);

}  // namespace sloscale::orch
