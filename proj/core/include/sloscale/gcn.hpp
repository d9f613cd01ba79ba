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

// Graph convolutional allocator: two normalised-adjacency convolutions over
// the node features, a dense embedding of the global features broadcast to
// every node, and a linear per-node score. Scores become partial SLOs through
// a per-path softmax split of the budget slack.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "sloscale/nn.hpp"
#include "sloscale/slo_oracle.hpp"

namespace sloscale::gcn {

using nn::RowMatrix;

struct FeatureRanges {
  oracle::Range capacity_p1{20.0, 400.0};
  oracle::Range base_latency_p2{1.0, 40.0};
  oracle::Range load{0.0, 1000.0};
  oracle::Range budget{0.0, 400.0};
  oracle::Range path_nodes{1.0, 8.0};
};

inline constexpr int kNodeFeatures = 3;    // p1, p2, load
inline constexpr int kGlobalFeatures = 2;  // budget, longest-path node count

struct GraphSample {
  Eigen::MatrixXd adjacency;  // N x N binary, zero diagonal
  RowMatrix features;         // N x 3, each column scaled to [0, 1]
  RowMatrix global;           // 1 x 2, scaled to [0, 1]
  std::vector<std::vector<int>> paths;
  std::vector<double> floors_ms;  // lower bound of each node's partial SLO
  double budget_ms = 0.0;

  int node_count() const { return static_cast<int>(features.rows()); }
};

struct LabeledSample {
  GraphSample sample;
  std::vector<double> target_ms;
};

// Values outside the ranges are clamped to [0, 1]; the first clamp in a
// process is logged as a warning.
GraphSample make_sample(const oracle::AllocationProblem& problem, const FeatureRanges& ranges);
LabeledSample make_labeled(const oracle::DatasetRecord& record, const FeatureRanges& ranges);

// D^-1/2 (A + I) D^-1/2 with D the row sums of A + I. With symmetrize the
// directed edges are mirrored first.
Eigen::MatrixXd normalize_adjacency(const Eigen::MatrixXd& adjacency, bool symmetrize = false);

struct Projection {
  std::vector<double> slo_ms;
  std::vector<int> owner_path;          // path that sets each node's value
  std::vector<Eigen::VectorXd> weights;  // softmax weights per path
  std::vector<double> slack;             // budget minus floors, per path
};

// Per path: floor + softmax(scores on the path) * (budget - sum of floors).
// A node on several paths takes the smallest of its per-path values, so each
// path sums to at most the budget (exactly the budget for a series chain).
// Throws Error(kInfeasible) when a path's floors reach the budget.
Projection project_allocation(const Eigen::VectorXd& scores, double budget_ms, std::span<const double> floors_ms,
                              const std::vector<std::vector<int>>& paths);
Projection project_allocation(const Eigen::VectorXd& scores, double budget_ms, double min_slo_per_node,
                              const std::vector<std::vector<int>>& paths);

// dL/dscores from dL/dslo.
Eigen::VectorXd projection_backward(const Projection& projection, const std::vector<std::vector<int>>& paths,
                                    const Eigen::VectorXd& grad_slo);

// Mean over nodes of ((pred - oracle) / budget)^2.
double allocation_loss(std::span<const double> pred_ms, std::span<const double> oracle_ms, double budget_ms);

// Common surface for trainable allocators so the meta-learner and the
// adaptation experiments can treat them alike.
class AllocatorModel {
 public:
  virtual ~AllocatorModel() = default;

  virtual const nn::ParamLayout& layout() const = 0;
  virtual Eigen::VectorXd init_params(std::uint64_t seed) const = 0;
  virtual std::vector<double> predict(const Eigen::VectorXd& params, const GraphSample& sample) const = 0;
  // Mean loss over the samples; adds the mean gradient into grad if given.
  virtual double loss(const Eigen::VectorXd& params, std::span<const LabeledSample> samples,
                      Eigen::VectorXd* grad) const = 0;
};

struct GcnConfig {
  int hidden = 32;
  int global_hidden = 16;
  bool symmetrize = false;
};

struct GcnCache {
  Eigen::MatrixXd ahat;
  RowMatrix ax;  // Ahat X
  RowMatrix z1;
  RowMatrix h1;
  RowMatrix ah1;  // Ahat H1
  RowMatrix z2;
  RowMatrix h2;
  RowMatrix zg;
  RowMatrix gemb;
  RowMatrix combined;
  Eigen::VectorXd scores;
};

class GcnModel final : public AllocatorModel {
 public:
  explicit GcnModel(GcnConfig config = {});

  const GcnConfig& config() const { return config_; }
  const nn::ParamLayout& layout() const override { return layout_; }
  Eigen::VectorXd init_params(std::uint64_t seed) const override;

  // Raw node scores (N); fills cache when given. Throws Error(kShapeMismatch).
  Eigen::VectorXd forward(const Eigen::VectorXd& params, const GraphSample& sample, GcnCache* cache = nullptr) const;

  std::vector<double> predict(const Eigen::VectorXd& params, const GraphSample& sample) const override;
  double loss(const Eigen::VectorXd& params, std::span<const LabeledSample> samples,
              Eigen::VectorXd* grad) const override;

  // Loss of one sample and its gradient (overwrites grad).
  double backward(const Eigen::VectorXd& params, const LabeledSample& labeled, Eigen::VectorXd& grad) const;

  // Tensor indices in the layout.
  enum Tensor : std::size_t { kW0, kB0, kW1, kB1, kWg, kBg, kWout, kBout };

 private:
  GcnConfig config_;
  nn::ParamLayout layout_;
};

inline constexpr const char* kGcnCheckpointHeader = "sloscale-gcn-checkpoint v1";

void save_checkpoint(std::ostream& out, const GcnModel& model, const Eigen::VectorXd& params);
// Rejects a different version or mismatching shapes with Error(kShapeMismatch).
Eigen::VectorXd load_checkpoint(std::istream& in, const GcnModel& model);

}  // namespace sloscale::gcn
