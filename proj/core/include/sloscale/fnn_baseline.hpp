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

// Feedforward allocator baseline. It sees the node features padded to a fixed
// node count plus the global features, but never the call edges. Its scores
// go through the same per-path projection as the GCN's.

#include "sloscale/gcn.hpp"

namespace sloscale::gcn {

struct FnnConfig {
  int max_nodes = 6;
  int hidden = 64;
};

class FnnModel final : public AllocatorModel {
 public:
  explicit FnnModel(FnnConfig config = {});

  const FnnConfig& config() const { return config_; }
  const nn::ParamLayout& layout() const override { return mlp_.layout(); }
  Eigen::VectorXd init_params(std::uint64_t seed) const override;

  // Raw per-node scores; independent of the adjacency matrix.
  Eigen::VectorXd forward(const Eigen::VectorXd& params, const GraphSample& sample,
                          nn::Mlp::Cache* cache = nullptr) const;

  std::vector<double> predict(const Eigen::VectorXd& params, const GraphSample& sample) const override;
  double loss(const Eigen::VectorXd& params, std::span<const LabeledSample> samples,
              Eigen::VectorXd* grad) const override;

 private:
  RowMatrix flatten(const GraphSample& sample) const;

  FnnConfig config_;
  nn::Mlp mlp_;
};

}  // namespace sloscale::gcn
