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

#include "sloscale/fnn_baseline.hpp"

#include <random>

#include "sloscale/error.hpp"

namespace sloscale::gcn {

FnnModel::FnnModel(FnnConfig config)
    : config_(config),
      mlp_({config.max_nodes * kNodeFeatures + kGlobalFeatures, config.hidden, config.hidden, config.max_nodes},
           nn::Activation::kIdentity) {}

Eigen::VectorXd FnnModel::init_params(std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  return mlp_.init_params(rng);
}

RowMatrix FnnModel::flatten(const GraphSample& sample) const {
  const int n = sample.node_count();
  if (n > config_.max_nodes) throw Error(ErrorCode::kShapeMismatch, "fnn: more nodes than max_nodes");
  RowMatrix x = RowMatrix::Zero(1, mlp_.input_dim());
  for (int i = 0; i < n; ++i) {
    for (int f = 0; f < kNodeFeatures; ++f) x(0, i * kNodeFeatures + f) = sample.features(i, f);
  }
  x(0, config_.max_nodes * kNodeFeatures) = sample.global(0, 0);
  x(0, config_.max_nodes * kNodeFeatures + 1) = sample.global(0, 1);
  return x;
}

Eigen::VectorXd FnnModel::forward(const Eigen::VectorXd& params, const GraphSample& sample,
                                  nn::Mlp::Cache* cache) const {
  RowMatrix out = mlp_.forward(params, flatten(sample), cache);
  return out.row(0).head(sample.node_count()).transpose();
}

std::vector<double> FnnModel::predict(const Eigen::VectorXd& params, const GraphSample& sample) const {
  return project_allocation(forward(params, sample), sample.budget_ms, sample.floors_ms, sample.paths).slo_ms;
}

double FnnModel::loss(const Eigen::VectorXd& params, std::span<const LabeledSample> samples,
                      Eigen::VectorXd* grad) const {
  if (samples.empty()) return 0.0;
  if (grad && grad->size() == 0) *grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(layout().size()));
  const double inv = 1.0 / static_cast<double>(samples.size());
  double total = 0.0;
  for (const auto& labeled : samples) {
    const GraphSample& s = labeled.sample;
    const int n = s.node_count();
    const auto& paths = s.paths;
    nn::Mlp::Cache cache;
    Eigen::VectorXd scores = forward(params, s, &cache);
    Projection proj = project_allocation(scores, s.budget_ms, s.floors_ms, paths);
    total += allocation_loss(proj.slo_ms, labeled.target_ms, s.budget_ms);
    if (!grad) continue;
    Eigen::VectorXd dslo(n);
    const double norm = 2.0 / (s.budget_ms * s.budget_ms * n);
    for (int i = 0; i < n; ++i) dslo[i] = norm * (proj.slo_ms[i] - labeled.target_ms[i]);
    Eigen::VectorXd dscores = projection_backward(proj, paths, dslo);
    RowMatrix dout = RowMatrix::Zero(1, config_.max_nodes);
    dout.row(0).head(n) = dscores.transpose();
    Eigen::VectorXd g = Eigen::VectorXd::Zero(params.size());
    mlp_.backward(params, cache, dout, &g);
    *grad += inv * g;
  }
  return total * inv;
}

}  // namespace sloscale::gcn
