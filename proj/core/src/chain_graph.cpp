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

#include "sloscale/chain_graph.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <string>

#include "sloscale/error.hpp"

namespace sloscale {

namespace {

[[noreturn]] void invalid(const std::string& what) {
  throw Error(ErrorCode::kConfigInvalid, "chain graph: " + what);
}

}  // namespace

ChainGraph::ChainGraph(int node_count, std::vector<Edge> edges)
    : node_count_(node_count), edges_(std::move(edges)) {
  if (node_count_ < 1) invalid("needs at least one node");
  std::sort(edges_.begin(), edges_.end());
  if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end()) {
    invalid("duplicate edge");
  }
  parents_.assign(node_count_, {});
  children_.assign(node_count_, {});
  for (const auto& [from, to] : edges_) {
    if (from < 0 || to < 0 || from >= node_count_ || to >= node_count_) {
      invalid("edge endpoint out of range");
    }
    if (from == to) invalid("self loop");
    children_[from].push_back(to);
    parents_[to].push_back(from);
  }

  std::vector<int> sources;
  std::vector<int> sinks;
  for (int v = 0; v < node_count_; ++v) {
    if (parents_[v].empty()) sources.push_back(v);
    if (children_[v].empty()) sinks.push_back(v);
  }
  if (sources.size() != 1) invalid("expected exactly one entry node");
  if (sinks.size() != 1) invalid("expected exactly one exit node");
  entry_ = sources.front();
  exit_ = sinks.front();

  // Kahn's algorithm, smallest ready node first so the order is canonical.
  std::vector<int> indegree(node_count_);
  for (int v = 0; v < node_count_; ++v) indegree[v] = static_cast<int>(parents_[v].size());
  std::set<int> ready(sources.begin(), sources.end());
  while (!ready.empty()) {
    int v = *ready.begin();
    ready.erase(ready.begin());
    topo_.push_back(v);
    for (int c : children_[v]) {
      if (--indegree[c] == 0) ready.insert(c);
    }
  }
  if (static_cast<int>(topo_.size()) != node_count_) invalid("graph has a cycle");

  // With a single source and a single sink in a DAG, every node lies on some
  // entry-to-exit path, so enumerating paths from the entry covers all nodes.
  std::vector<int> stack{entry_};
  std::function<void(int)> walk = [&](int v) {
    if (v == exit_) {
      paths_.push_back(stack);
      return;
    }
    for (int c : children_[v]) {
      stack.push_back(c);
      walk(c);
      stack.pop_back();
    }
  };
  walk(entry_);
}

ChainGraph ChainGraph::series(int node_count) {
  std::vector<Edge> edges;
  for (int i = 0; i + 1 < node_count; ++i) edges.emplace_back(i, i + 1);
  return ChainGraph(node_count, std::move(edges));
}

int ChainGraph::longest_path_nodes() const {
  std::size_t best = 0;
  for (const auto& p : paths_) best = std::max(best, p.size());
  return static_cast<int>(best);
}

Eigen::MatrixXd ChainGraph::adjacency() const {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(node_count_, node_count_);
  for (const auto& [from, to] : edges_) a(from, to) = 1.0;
  return a;
}

double ChainGraph::critical_path(std::span<const double> node_weights) const {
  if (static_cast<int>(node_weights.size()) != node_count_) {
    throw Error(ErrorCode::kShapeMismatch, "critical_path: weight count != node count");
  }
  std::vector<double> finish(node_count_, 0.0);
  for (int v : topo_) {
    double start = 0.0;
    for (int p : parents_[v]) start = std::max(start, finish[p]);
    finish[v] = start + node_weights[v];
  }
  return finish[exit_];
}

ChainGraph ChainGraph::relabelled(std::span<const int> perm) const {
  if (static_cast<int>(perm.size()) != node_count_) {
    throw Error(ErrorCode::kShapeMismatch, "relabelled: permutation size != node count");
  }
  std::vector<Edge> edges;
  edges.reserve(edges_.size());
  for (const auto& [from, to] : edges_) edges.emplace_back(perm[from], perm[to]);
  return ChainGraph(node_count_, std::move(edges));
}

}  // namespace sloscale
