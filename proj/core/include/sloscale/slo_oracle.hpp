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

// Ground-truth partial-SLO allocation. A node that receives a partial SLO s
// needs enough replicas that its deterministic latency stays within s; the
// allocators split the end-to-end budget so every entry-to-exit path sums to
// at most the budget while minimising the total core count.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "sloscale/chain_graph.hpp"
#include "sloscale/sim.hpp"

namespace sloscale::oracle {

struct AllocationProblem {
  ChainGraph graph;
  std::vector<sim::LlpProfile> profiles;  // at the current tier
  std::vector<double> loads;              // req/s offered to each node
  std::vector<double> cores;              // cores per instance
  double budget_ms = 0.0;
};

// Throws Error(kShapeMismatch) on inconsistent sizes and Error(kInfeasible)
// when some path's base latencies already exhaust the budget.
void validate(const AllocationProblem& problem);

// Largest sum of base latencies over entry-to-exit paths.
double base_latency_floor(const AllocationProblem& problem);

struct SloAllocation {
  std::vector<double> partial_slo;  // ms, one per node
  double total_cost = 0.0;          // cores
};

// ceil(load / (p1 * (1 - p2 / partial_slo))), at least one.
// Throws Error(kInfeasible) if partial_slo <= p2.
int replicas_needed(const sim::LlpProfile& profile, double load, double partial_slo);

double node_cost(const sim::LlpProfile& profile, double load, double partial_slo, double cores = 1.0);

// Fractional replica count, max(1, load / (p1 * (1 - p2 / s))); infinite at
// or below p2.
double relaxed_replicas(const sim::LlpProfile& profile, double load, double partial_slo);

double allocation_cost(const AllocationProblem& problem, const std::vector<double>& partial_slo);

// Per-node partial SLO above base latency and every path sum within budget
// (up to tol ms).
bool is_feasible(const AllocationProblem& problem, const std::vector<double>& partial_slo,
                 double tol = 1e-9);

// Node share min over its paths of budget / path length; if that would not
// clear the base latencies, base latency plus an equal share of path slack.
SloAllocation equal_split(const AllocationProblem& problem);

// Exhaustive search over partial SLOs on the k * step_ms lattice. Minimum
// total cost, ties broken by the lexicographically smallest allocation.
// At most 4 nodes. Throws Error(kInfeasible) when no lattice point fits.
SloAllocation allocate_grid(const AllocationProblem& problem, double step_ms);

struct GdOptions {
  double lr = 1.0;  // initial step length in ms along the normalised gradient
  int max_iters = 5000;
  double tol = 1e-6;  // stop when the largest budget transfer falls below tol ms
  double fd_step = 0.1;
};

struct GdResult {
  SloAllocation allocation;          // integer replicas, polished
  std::vector<double> relaxed_slo;   // optimum of the fractional-replica cost
  double relaxed_cost = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Projected gradient descent on the fractional-replica cost, starting from
// the equal split, with finite-difference gradients. The fractional optimum
// is then rounded to whole replicas and greedily tightened. The returned
// allocation never costs more than equal_split. converged == false reports
// the best iterate found within max_iters.
GdResult allocate_gd(const AllocationProblem& problem, const GdOptions& options = {});

// Euclidean projection onto {s >= floor, path sums <= budget}.
std::vector<double> project_feasible(const AllocationProblem& problem, std::vector<double> x,
                                     const std::vector<double>& floor);

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

struct TaskSpec {
  std::string id;
  ChainGraph graph;
  std::vector<double> cores;  // per node
  // When base_profiles holds one entry per node, each draw jitters the node's
  // base p1 and p2 by a factor in [1 - jitter, 1 + jitter]; otherwise both
  // are drawn from the ranges below.
  std::vector<sim::LlpProfile> base_profiles;
  double jitter = 0.1;
  Range capacity_p1{50.0, 200.0};
  Range base_latency_p2{2.0, 20.0};
  Range load{50.0, 600.0};
  Range budget_factor{1.5, 4.0};  // budget = factor * base_latency_floor
  int max_replicas = 64;          // draws needing more replicas are skipped
};

struct DatasetRecord {
  std::string task_id;
  AllocationProblem problem;
  SloAllocation label;  // fractional-replica optimum and its integer cost
};

struct Dataset {
  std::vector<DatasetRecord> records;
  int skipped = 0;
};

// Sample i draws from a stream seeded by derive_seed(seed, i); every node
// carries the same chain load.
Dataset gen_dataset(const TaskSpec& task, int n_samples, std::uint64_t seed);

// Line-delimited text; see the header written by write_dataset for the
// column order.
void write_dataset(std::ostream& out, const std::vector<DatasetRecord>& records);
std::vector<DatasetRecord> read_dataset(std::istream& in);

inline constexpr const char* kDatasetHeader = "#sloscale-dataset v1";

}  // namespace sloscale::oracle
