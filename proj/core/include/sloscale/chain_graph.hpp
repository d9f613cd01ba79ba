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

#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace sloscale {

using Edge = std::pair<int, int>;

// Directed acyclic call graph with a single entry (source) and a single
// exit (sink). Nodes are 0..node_count()-1.
class ChainGraph {
 public:
  ChainGraph() = default;

  // Throws Error(kConfigInvalid) unless the edges form a DAG with exactly one
  // source and one sink.
  ChainGraph(int node_count, std::vector<Edge> edges);

  // a -> b -> c ...
  static ChainGraph series(int node_count);

  int node_count() const { return node_count_; }
  const std::vector<Edge>& edges() const { return edges_; }
  int entry() const { return entry_; }
  int exit() const { return exit_; }
  const std::vector<int>& topological_order() const { return topo_; }
  const std::vector<std::vector<int>>& parents() const { return parents_; }
  const std::vector<std::vector<int>>& children() const { return children_; }

  // Every entry-to-exit path, each listed from entry to exit.
  const std::vector<std::vector<int>>& paths() const { return paths_; }

  // Node count on the longest entry-to-exit path.
  int longest_path_nodes() const;

  bool is_series() const { return paths_.size() == 1 && static_cast<int>(paths_[0].size()) == node_count_; }

  // Binary N x N matrix, A(i, j) = 1 for the call edge i -> j.
  Eigen::MatrixXd adjacency() const;

  // Maximum over entry-to-exit paths of the summed node weights.
  double critical_path(std::span<const double> node_weights) const;

  // Same graph with nodes relabelled: node i becomes perm[i].
  ChainGraph relabelled(std::span<const int> perm) const;

  friend bool operator==(const ChainGraph& a, const ChainGraph& b) {
    return a.node_count_ == b.node_count_ && a.edges_ == b.edges_;
  }

 private:
  int node_count_ = 0;
  std::vector<Edge> edges_;
  int entry_ = -1;
  int exit_ = -1;
  std::vector<int> topo_;
  std::vector<std::vector<int>> parents_;
  std::vector<std::vector<int>> children_;
  std::vector<std::vector<int>> paths_;
};

}  // namespace sloscale
