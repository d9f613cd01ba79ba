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

// First-order MAML over allocation tasks (one task per call-chain structure
// and hidden instance sizes), plus the online shift detector and the few-shot
// re-adaptation used when the cluster changes.

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sloscale/gcn.hpp"

namespace sloscale::meta {

struct Task {
  std::string id;
  ChainGraph graph;
  std::vector<gcn::LabeledSample> train;
  std::vector<gcn::LabeledSample> test;
};

struct MetaConfig {
  double inner_lr = 20.0;  // alpha
  double outer_lr = 20.0;  // beta
  int inner_steps = 5;     // k
  int tasks_per_batch = 4;
  int meta_iterations = 500;
  double shift_threshold = 3e-3;  // rolling MSE that triggers re-adaptation
  int adapt_steps_budget = 200;
};

void validate(const MetaConfig& config);

// Shuffled 70/30 split, deterministic per seed. Needs at least 10 samples
// (Error(kTooFewSamples) otherwise).
Task split_task(std::string id, ChainGraph graph, std::vector<gcn::LabeledSample> samples, std::uint64_t seed);

// k full-batch gradient steps on samples starting from theta.
Eigen::VectorXd inner_adapt(const gcn::AllocatorModel& model, const Eigen::VectorXd& theta,
                            std::span<const gcn::LabeledSample> samples, double alpha, int steps);

struct MetaStep {
  Eigen::VectorXd theta;
  double mean_test_loss = 0.0;  // after adaptation, before the outer update
};

// Adapts to each task, then moves theta by beta times the mean gradient of
// the test loss evaluated at the adapted parameters (first-order meta
// gradient). Tasks are reduced in the order given.
MetaStep meta_step(const gcn::AllocatorModel& model, const Eigen::VectorXd& theta,
                   std::span<const Task* const> batch, const MetaConfig& config);

struct MetaTraining {
  Eigen::VectorXd theta;
  std::vector<double> curve;  // mean post-adaptation test loss per iteration
};

// Tasks for each meta batch are drawn uniformly (with replacement).
MetaTraining meta_train(const gcn::AllocatorModel& model, Eigen::VectorXd theta, std::span<const Task> pool,
                        const MetaConfig& config, std::uint64_t seed);

// True iff the mean of the errors exceeds threshold. Needs >= 5 errors.
bool detect_shift(std::span<const double> rolling_errors, double threshold);

class ShiftDetector {
 public:
  explicit ShiftDetector(std::size_t window = 10);
  void observe(double error);
  bool ready() const { return errors_.size() >= window_; }
  bool shifted(double threshold) const;
  void reset() { errors_.clear(); }

 private:
  std::size_t window_;
  std::deque<double> errors_;
};

struct AdaptationDiagnostics {
  std::string task_id;
  std::vector<double> loss;    // evaluation loss after 0, 1, ..., steps
  int steps_to_threshold = -1;  // first step at or below threshold; -1 if never
};

struct Adaptation {
  Eigen::VectorXd theta;
  AdaptationDiagnostics diagnostics;
};

// Gradient steps on samples, at most config.adapt_steps_budget of them. The
// loss on eval (samples when eval is empty) is recorded after every step and
// adaptation stops early once it reaches threshold.
Adaptation adapt_to_new_task(const gcn::AllocatorModel& model, const Eigen::VectorXd& theta,
                             std::span<const gcn::LabeledSample> samples, const MetaConfig& config,
                             double threshold, std::span<const gcn::LabeledSample> eval = {},
                             std::string task_id = {});

// Rows "task_id,step,loss".
void write_adaptation_csv(std::ostream& out, std::span<const AdaptationDiagnostics> runs);

struct TaskManifestEntry {
  std::string id;
  ChainGraph graph;
};

inline constexpr const char* kMetaCheckpointHeader = "sloscale-meta-checkpoint v1";

void save_meta_checkpoint(std::ostream& out, const gcn::GcnModel& model, const Eigen::VectorXd& theta,
                          const MetaConfig& config, std::span<const TaskManifestEntry> tasks);

struct MetaCheckpoint {
  Eigen::VectorXd theta;
  MetaConfig config;
  std::vector<TaskManifestEntry> tasks;
};

MetaCheckpoint load_meta_checkpoint(std::istream& in, const gcn::GcnModel& model);

}  // namespace sloscale::meta
