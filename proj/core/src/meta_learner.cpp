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
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>

#include <fmt/format.h>

#include "sloscale/error.hpp"

namespace sloscale::meta {

void validate(const MetaConfig& config) {
  if (!(config.inner_lr > 0.0) || !(config.outer_lr >= 0.0)) {
    throw Error(ErrorCode::kConfigInvalid, "meta: learning rates must be positive");
  }
  if (config.inner_steps < 1) throw Error(ErrorCode::kConfigInvalid, "meta: inner_steps must be >= 1");
  if (config.tasks_per_batch < 1) throw Error(ErrorCode::kConfigInvalid, "meta: tasks_per_batch must be >= 1");
  if (config.adapt_steps_budget < 0) throw Error(ErrorCode::kConfigInvalid, "meta: negative adaptation budget");
}

Task split_task(std::string id, ChainGraph graph, std::vector<gcn::LabeledSample> samples, std::uint64_t seed) {
  if (samples.size() < 10) {
    throw Error(ErrorCode::kTooFewSamples, fmt::format("task {}: {} samples, need at least 10", id, samples.size()));
  }
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_train = static_cast<std::size_t>(std::llround(0.7 * static_cast<double>(samples.size())));
  Task task{std::move(id), std::move(graph), {}, {}};
  for (std::size_t i = 0; i < order.size(); ++i) {
    auto& dst = i < n_train ? task.train : task.test;
    dst.push_back(std::move(samples[order[i]]));
  }
  return task;
}

Eigen::VectorXd inner_adapt(const gcn::AllocatorModel& model, const Eigen::VectorXd& theta,
                            std::span<const gcn::LabeledSample> samples, double alpha, int steps) {
  Eigen::VectorXd adapted = theta;
  for (int k = 0; k < steps; ++k) {
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(theta.size());
    model.loss(adapted, samples, &grad);
    adapted = nn::sgd_step(adapted, grad, alpha);
  }
  return adapted;
}

MetaStep meta_step(const gcn::AllocatorModel& model, const Eigen::VectorXd& theta,
                   std::span<const Task* const> batch, const MetaConfig& config) {
  if (batch.empty()) throw Error(ErrorCode::kInvalidArgument, "meta_step: empty task batch");
  Eigen::VectorXd meta_grad = Eigen::VectorXd::Zero(theta.size());
  double test_loss = 0.0;
  for (const Task* task : batch) {
    Eigen::VectorXd adapted = inner_adapt(model, theta, task->train, config.inner_lr, config.inner_steps);
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(theta.size());
    test_loss += model.loss(adapted, task->test, &grad);
    meta_grad += grad;
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  MetaStep out;
  out.theta = theta - config.outer_lr * inv * meta_grad;
  out.mean_test_loss = test_loss * inv;
  if (!out.theta.allFinite()) throw Error(ErrorCode::kNumericFailure, "meta_step: non-finite parameters");
  return out;
}

MetaTraining meta_train(const gcn::AllocatorModel& model, Eigen::VectorXd theta, std::span<const Task> pool,
                        const MetaConfig& config, std::uint64_t seed) {
  validate(config);
  if (pool.empty()) throw Error(ErrorCode::kInvalidArgument, "meta_train: empty task pool");
  for (const auto& task : pool) {
    if (task.train.size() < 5 || task.test.size() < 5) {
      throw Error(ErrorCode::kTooFewSamples, "meta_train: task " + task.id + " needs >= 5 samples per split");
    }
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  MetaTraining out;
  std::vector<const Task*> batch(static_cast<std::size_t>(config.tasks_per_batch));
  for (int it = 0; it < config.meta_iterations; ++it) {
    for (auto& t : batch) t = &pool[pick(rng)];
    MetaStep step = meta_step(model, theta, batch, config);
    theta = std::move(step.theta);
    out.curve.push_back(step.mean_test_loss);
  }
  out.theta = std::move(theta);
  return out;
}

bool detect_shift(std::span<const double> rolling_errors, double threshold) {
  if (rolling_errors.size() < 5) throw Error(ErrorCode::kInvalidArgument, "detect_shift: window needs >= 5 errors");
  double mean = std::accumulate(rolling_errors.begin(), rolling_errors.end(), 0.0) /
                static_cast<double>(rolling_errors.size());
  return mean > threshold;
}

ShiftDetector::ShiftDetector(std::size_t window) : window_(window) {
  if (window_ < 5) throw Error(ErrorCode::kInvalidArgument, "ShiftDetector: window must be >= 5");
}

void ShiftDetector::observe(double error) {
  errors_.push_back(error);
  if (errors_.size() > window_) errors_.pop_front();
}

bool ShiftDetector::shifted(double threshold) const {
  if (!ready()) return false;
  std::vector<double> window(errors_.begin(), errors_.end());
  return detect_shift(window, threshold);
}

Adaptation adapt_to_new_task(const gcn::AllocatorModel& model, const Eigen::VectorXd& theta,
                             std::span<const gcn::LabeledSample> samples, const MetaConfig& config,
                             double threshold, std::span<const gcn::LabeledSample> eval, std::string task_id) {
  if (samples.empty()) throw Error(ErrorCode::kTooFewSamples, "adapt_to_new_task: no samples");
  if (eval.empty()) eval = samples;
  Adaptation out{theta, {std::move(task_id), {}, -1}};
  auto record = [&](int step) {
    double l = model.loss(out.theta, eval, nullptr);
    out.diagnostics.loss.push_back(l);
    if (out.diagnostics.steps_to_threshold < 0 && l <= threshold) out.diagnostics.steps_to_threshold = step;
  };
  record(0);
  for (int step = 1; step <= config.adapt_steps_budget && out.diagnostics.steps_to_threshold < 0; ++step) {
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(theta.size());
    model.loss(out.theta, samples, &grad);
    out.theta = nn::sgd_step(out.theta, grad, config.inner_lr);
    record(step);
  }
  return out;
}

void write_adaptation_csv(std::ostream& out, std::span<const AdaptationDiagnostics> runs) {
  out << "task_id,step,loss\n";
  for (const auto& run : runs) {
    for (std::size_t step = 0; step < run.loss.size(); ++step) {
      out << fmt::format("{},{},{:.10g}\n", run.task_id, step, run.loss[step]);
    }
  }
}

void save_meta_checkpoint(std::ostream& out, const gcn::GcnModel& model, const Eigen::VectorXd& theta,
                          const MetaConfig& config, std::span<const TaskManifestEntry> tasks) {
  out << kMetaCheckpointHeader << '\n';
  out << fmt::format("meta inner_lr {:.17g} outer_lr {:.17g} inner_steps {} tasks_per_batch {} meta_iterations {} "
                     "shift_threshold {:.17g} adapt_steps_budget {}\n",
                     config.inner_lr, config.outer_lr, config.inner_steps, config.tasks_per_batch,
                     config.meta_iterations, config.shift_threshold, config.adapt_steps_budget);
  out << "tasks " << tasks.size() << '\n';
  for (const auto& t : tasks) {
    out << "task " << t.id << ' ' << t.graph.node_count() << ' ' << t.graph.edges().size();
    for (const auto& [a, b] : t.graph.edges()) out << ' ' << a << ' ' << b;
    out << '\n';
  }
  gcn::save_checkpoint(out, model, theta);
}

MetaCheckpoint load_meta_checkpoint(std::istream& in, const gcn::GcnModel& model) {
  std::string line;
  if (!std::getline(in, line) || line != kMetaCheckpointHeader) {
    throw Error(ErrorCode::kShapeMismatch, "meta checkpoint: unsupported header");
  }
  MetaCheckpoint ck;
  std::string word;
  std::string key;
  auto expect = [&](const char* name) {
    if (!(in >> key) || key != name) throw Error(ErrorCode::kShapeMismatch, std::string("meta checkpoint: expected ") + name);
  };
  expect("meta");
  expect("inner_lr");
  in >> ck.config.inner_lr;
  expect("outer_lr");
  in >> ck.config.outer_lr;
  expect("inner_steps");
  in >> ck.config.inner_steps;
  expect("tasks_per_batch");
  in >> ck.config.tasks_per_batch;
  expect("meta_iterations");
  in >> ck.config.meta_iterations;
  expect("shift_threshold");
  in >> ck.config.shift_threshold;
  expect("adapt_steps_budget");
  in >> ck.config.adapt_steps_budget;
  std::size_t n_tasks = 0;
  expect("tasks");
  in >> n_tasks;
  for (std::size_t i = 0; i < n_tasks; ++i) {
    expect("task");
    TaskManifestEntry entry;
    int nodes = 0;
    std::size_t n_edges = 0;
    in >> entry.id >> nodes >> n_edges;
    std::vector<Edge> edges(n_edges);
    for (auto& e : edges) in >> e.first >> e.second;
    if (!in) throw Error(ErrorCode::kShapeMismatch, "meta checkpoint: truncated task manifest");
    entry.graph = ChainGraph(nodes, std::move(edges));
    ck.tasks.push_back(std::move(entry));
  }
  std::getline(in, line);  // rest of the last manifest line
  ck.theta = gcn::load_checkpoint(in, model);
  return ck;
}

}  // namespace sloscale::meta
