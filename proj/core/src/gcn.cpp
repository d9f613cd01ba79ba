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

#include "sloscale/gcn.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <string>

#include <spdlog/spdlog.h>

#include "sloscale/error.hpp"

namespace sloscale::gcn {

namespace {

double scale(double v, const oracle::Range& r, bool& clamped) {
  double x = (v - r.lo) / (r.hi - r.lo);
  if (x < 0.0 || x > 1.0) {
    clamped = true;
    x = std::clamp(x, 0.0, 1.0);
  }
  return x;
}

RowMatrix relu(const RowMatrix& z) { return z.cwiseMax(0.0); }

RowMatrix relu_backward(const RowMatrix& z, const RowMatrix& dy) {
  return (z.array() > 0.0).select(dy.array(), 0.0).matrix();
}

}  // namespace

GraphSample make_sample(const oracle::AllocationProblem& problem, const FeatureRanges& ranges) {
  oracle::validate(problem);
  const int n = problem.graph.node_count();
  GraphSample s;
  s.adjacency = problem.graph.adjacency();
  s.features.resize(n, kNodeFeatures);
  bool clamped = false;
  for (int i = 0; i < n; ++i) {
    s.features(i, 0) = scale(problem.profiles[i].capacity_p1, ranges.capacity_p1, clamped);
    s.features(i, 1) = scale(problem.profiles[i].base_latency_p2, ranges.base_latency_p2, clamped);
    s.features(i, 2) = scale(problem.loads[i], ranges.load, clamped);
    s.floors_ms.push_back(problem.profiles[i].base_latency_p2 * (1.0 + 1e-6));
  }
  s.global.resize(1, kGlobalFeatures);
  s.global(0, 0) = scale(problem.budget_ms, ranges.budget, clamped);
  s.global(0, 1) = scale(problem.graph.longest_path_nodes(), ranges.path_nodes, clamped);
  if (clamped) {
    static std::atomic<bool> warned{false};
    if (!warned.exchange(true)) {
      spdlog::warn("allocator input outside the configured feature ranges; clamped to [0, 1] (reported once)");
    } else {
      spdlog::debug("allocator input clamped to the feature ranges");
    }
  }
  s.paths = problem.graph.paths();
  s.budget_ms = problem.budget_ms;
  return s;
}

LabeledSample make_labeled(const oracle::DatasetRecord& record, const FeatureRanges& ranges) {
  return {make_sample(record.problem, ranges), record.label.partial_slo};
}

Eigen::MatrixXd normalize_adjacency(const Eigen::MatrixXd& adjacency, bool symmetrize) {
  if (adjacency.rows() != adjacency.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "normalize_adjacency: matrix must be square");
  }
  const auto n = adjacency.rows();
  Eigen::MatrixXd a = adjacency;
  if (symmetrize) a = a.cwiseMax(a.transpose()).eval();
  a += Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd inv_sqrt = a.rowwise().sum().cwiseSqrt().cwiseInverse();
  return inv_sqrt.asDiagonal() * a * inv_sqrt.asDiagonal();
}

Projection project_allocation(const Eigen::VectorXd& scores, double budget_ms, std::span<const double> floors_ms,
                              const std::vector<std::vector<int>>& paths) {
  const auto n = static_cast<std::size_t>(scores.size());
  if (floors_ms.size() != n) throw Error(ErrorCode::kShapeMismatch, "project_allocation: floors size");
  Projection out;
  out.slo_ms.assign(n, std::numeric_limits<double>::infinity());
  out.owner_path.assign(n, -1);
  for (std::size_t p = 0; p < paths.size(); ++p) {
    const auto& path = paths[p];
    double floor_sum = 0.0;
    double top = -std::numeric_limits<double>::infinity();
    for (int v : path) {
      floor_sum += floors_ms[v];
      top = std::max(top, scores[v]);
    }
    double slack = budget_ms - floor_sum;
    if (!(slack > 0.0)) throw Error(ErrorCode::kInfeasible, "project_allocation: budget does not cover floors");
    Eigen::VectorXd w(static_cast<Eigen::Index>(path.size()));
    for (std::size_t a = 0; a < path.size(); ++a) w[static_cast<Eigen::Index>(a)] = std::exp(scores[path[a]] - top);
    w /= w.sum();
    for (std::size_t a = 0; a < path.size(); ++a) {
      int v = path[a];
      double value = floors_ms[v] + slack * w[static_cast<Eigen::Index>(a)];
      if (value < out.slo_ms[v]) {
        out.slo_ms[v] = value;
        out.owner_path[v] = static_cast<int>(p);
      }
    }
    out.weights.push_back(std::move(w));
    out.slack.push_back(slack);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (out.owner_path[i] < 0) throw Error(ErrorCode::kShapeMismatch, "project_allocation: node on no path");
  }
  return out;
}

Projection project_allocation(const Eigen::VectorXd& scores, double budget_ms, double min_slo_per_node,
                              const std::vector<std::vector<int>>& paths) {
  std::vector<double> floors(static_cast<std::size_t>(scores.size()), min_slo_per_node);
  return project_allocation(scores, budget_ms, floors, paths);
}

Eigen::VectorXd projection_backward(const Projection& projection, const std::vector<std::vector<int>>& paths,
                                    const Eigen::VectorXd& grad_slo) {
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(grad_slo.size());
  for (Eigen::Index i = 0; i < grad_slo.size(); ++i) {
    if (grad_slo[i] == 0.0) continue;
    int p = projection.owner_path[static_cast<std::size_t>(i)];
    const auto& path = paths[static_cast<std::size_t>(p)];
    const Eigen::VectorXd& w = projection.weights[static_cast<std::size_t>(p)];
    double slack = projection.slack[static_cast<std::size_t>(p)];
    auto pos = static_cast<Eigen::Index>(std::find(path.begin(), path.end(), static_cast<int>(i)) - path.begin());
    for (Eigen::Index b = 0; b < w.size(); ++b) {
      double d = slack * w[pos] * ((b == pos ? 1.0 : 0.0) - w[b]);
      grad[path[static_cast<std::size_t>(b)]] += grad_slo[i] * d;
    }
  }
  return grad;
}

double allocation_loss(std::span<const double> pred_ms, std::span<const double> oracle_ms, double budget_ms) {
  if (pred_ms.size() != oracle_ms.size() || pred_ms.empty()) {
    throw Error(ErrorCode::kShapeMismatch, "allocation_loss: node sets differ");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < pred_ms.size(); ++i) {
    double d = (pred_ms[i] - oracle_ms[i]) / budget_ms;
    total += d * d;
  }
  return total / static_cast<double>(pred_ms.size());
}

GcnModel::GcnModel(GcnConfig config) : config_(config) {
  const int h = config_.hidden;
  const int g = config_.global_hidden;
  layout_.add("W0", kNodeFeatures, h);
  layout_.add("b0", 1, h);
  layout_.add("W1", h, h);
  layout_.add("b1", 1, h);
  layout_.add("Wg", kGlobalFeatures, g);
  layout_.add("bg", 1, g);
  layout_.add("Wout", h + g, 1);
  layout_.add("bout", 1, 1);
}

Eigen::VectorXd GcnModel::init_params(std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  Eigen::VectorXd flat = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(layout_.size()));
  for (std::size_t t : {kW0, kW1, kWg, kWout}) {
    const auto& spec = layout_[t];
    double bound = std::sqrt(6.0 / static_cast<double>(spec.rows + spec.cols));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (std::size_t i = 0; i < spec.size(); ++i) flat[static_cast<Eigen::Index>(spec.offset + i)] = dist(rng);
  }
  return flat;
}

Eigen::VectorXd GcnModel::forward(const Eigen::VectorXd& params, const GraphSample& sample, GcnCache* cache) const {
  const auto n = sample.features.rows();
  if (static_cast<std::size_t>(params.size()) != layout_.size()) {
    throw Error(ErrorCode::kShapeMismatch, "gcn: parameter vector size");
  }
  if (n < 1 || sample.features.cols() != kNodeFeatures || sample.adjacency.rows() != n ||
      sample.adjacency.cols() != n || sample.global.rows() != 1 || sample.global.cols() != kGlobalFeatures) {
    throw Error(ErrorCode::kShapeMismatch, "gcn: sample shapes inconsistent");
  }
  GcnCache local;
  GcnCache& c = cache ? *cache : local;
  c.ahat = normalize_adjacency(sample.adjacency, config_.symmetrize);
  c.ax = c.ahat * sample.features;
  c.z1 = c.ax * layout_.view(params, kW0);
  c.z1.rowwise() += layout_.view(params, kB0).row(0);
  c.h1 = relu(c.z1);
  c.ah1 = c.ahat * c.h1;
  c.z2 = c.ah1 * layout_.view(params, kW1);
  c.z2.rowwise() += layout_.view(params, kB1).row(0);
  c.h2 = relu(c.z2);
  c.zg = sample.global * layout_.view(params, kWg);
  c.zg += layout_.view(params, kBg);
  c.gemb = relu(c.zg);
  c.combined.resize(n, config_.hidden + config_.global_hidden);
  c.combined.leftCols(config_.hidden) = c.h2;
  c.combined.rightCols(config_.global_hidden) = c.gemb.replicate(n, 1);
  RowMatrix out = c.combined * layout_.view(params, kWout);
  c.scores = out.col(0).array() + layout_.view(params, kBout)(0, 0);
  return c.scores;
}

std::vector<double> GcnModel::predict(const Eigen::VectorXd& params, const GraphSample& sample) const {
  Eigen::VectorXd scores = forward(params, sample);
  return project_allocation(scores, sample.budget_ms, sample.floors_ms, sample.paths).slo_ms;
}

double GcnModel::backward(const Eigen::VectorXd& params, const LabeledSample& labeled, Eigen::VectorXd& grad) const {
  const GraphSample& s = labeled.sample;
  GcnCache c;
  Eigen::VectorXd scores = forward(params, s, &c);
  Projection proj = project_allocation(scores, s.budget_ms, s.floors_ms, s.paths);
  const auto n = static_cast<Eigen::Index>(proj.slo_ms.size());
  if (static_cast<Eigen::Index>(labeled.target_ms.size()) != n) {
    throw Error(ErrorCode::kShapeMismatch, "gcn: label length");
  }
  double loss = allocation_loss(proj.slo_ms, labeled.target_ms, s.budget_ms);

  Eigen::VectorXd dslo(n);
  const double norm = 2.0 / (s.budget_ms * s.budget_ms * static_cast<double>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    dslo[i] = norm * (proj.slo_ms[static_cast<std::size_t>(i)] - labeled.target_ms[static_cast<std::size_t>(i)]);
  }
  RowMatrix dout = projection_backward(proj, s.paths, dslo);

  grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(layout_.size()));
  layout_.view(grad, kWout) = c.combined.transpose() * dout;
  layout_.view(grad, kBout)(0, 0) = dout.sum();
  RowMatrix dcomb = dout * layout_.view(params, kWout).transpose();
  RowMatrix dh2 = dcomb.leftCols(config_.hidden);
  RowMatrix dgemb = dcomb.rightCols(config_.global_hidden).colwise().sum();

  RowMatrix dz2 = relu_backward(c.z2, dh2);
  layout_.view(grad, kW1) = c.ah1.transpose() * dz2;
  layout_.view(grad, kB1) = dz2.colwise().sum();
  RowMatrix dh1 = c.ahat.transpose() * (dz2 * layout_.view(params, kW1).transpose());
  RowMatrix dz1 = relu_backward(c.z1, dh1);
  layout_.view(grad, kW0) = c.ax.transpose() * dz1;
  layout_.view(grad, kB0) = dz1.colwise().sum();

  RowMatrix dzg = relu_backward(c.zg, dgemb);
  layout_.view(grad, kWg) = s.global.transpose() * dzg;
  layout_.view(grad, kBg) = dzg;
  return loss;
}

double GcnModel::loss(const Eigen::VectorXd& params, std::span<const LabeledSample> samples,
                      Eigen::VectorXd* grad) const {
  if (samples.empty()) return 0.0;
  if (grad && grad->size() == 0) *grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(layout_.size()));
  double total = 0.0;
  Eigen::VectorXd g;
  const double inv = 1.0 / static_cast<double>(samples.size());
  for (const auto& labeled : samples) {
    if (grad) {
      total += backward(params, labeled, g);
      *grad += inv * g;
    } else {
      total += allocation_loss(predict(params, labeled.sample), labeled.target_ms, labeled.sample.budget_ms);
    }
  }
  return total * inv;
}

void save_checkpoint(std::ostream& out, const GcnModel& model, const Eigen::VectorXd& params) {
  out << kGcnCheckpointHeader << '\n';
  out << "config hidden " << model.config().hidden << " global_hidden " << model.config().global_hidden
      << " symmetrize " << (model.config().symmetrize ? 1 : 0) << '\n';
  nn::write_tensors(out, model.layout(), params);
}

Eigen::VectorXd load_checkpoint(std::istream& in, const GcnModel& model) {
  std::string line;
  if (!std::getline(in, line) || line != kGcnCheckpointHeader) {
    throw Error(ErrorCode::kShapeMismatch, "gcn checkpoint: unsupported header");
  }
  std::string word;
  std::string key_h;
  std::string key_g;
  std::string key_s;
  int hidden = 0;
  int global_hidden = 0;
  int symmetrize = 0;
  if (!(in >> word >> key_h >> hidden >> key_g >> global_hidden >> key_s >> symmetrize) || word != "config") {
    throw Error(ErrorCode::kShapeMismatch, "gcn checkpoint: missing config line");
  }
  if (hidden != model.config().hidden || global_hidden != model.config().global_hidden ||
      (symmetrize != 0) != model.config().symmetrize) {
    throw Error(ErrorCode::kShapeMismatch, "gcn checkpoint: configuration differs from the model");
  }
  return nn::read_tensors(in, model.layout());
}

}  // namespace sloscale::gcn
