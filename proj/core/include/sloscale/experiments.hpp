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

// Batch studies shared by the command line tool and the acceptance suite:
// meta-training from a scenario, adaptation speed of the allocators on
// held-out tasks, recovery after a call-graph change, and the paired
// comparison of the two control-loop variants.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sloscale/meta_learner.hpp"
#include "sloscale/orchestrator.hpp"
#include "sloscale/scenario.hpp"

namespace sloscale::orch {

struct MetaResult {
  Eigen::VectorXd theta;
  std::vector<double> curve;
  std::vector<meta::TaskManifestEntry> tasks;
};

// Builds the training pool from the task suite and meta-trains a fresh GCN.
MetaResult train_meta(const Scenario& scenario, std::uint64_t seed);

struct AdaptationTrial {
  std::string task_id;
  std::uint64_t seed = 0;
  // Gradient steps to reach the loss threshold; budget + 1 when never reached.
  int meta_steps = 0;
  int scratch_steps = 0;
  int fnn_steps = 0;
};

struct AdaptationStudy {
  std::vector<AdaptationTrial> trials;
  int budget = 0;
  double threshold = 0.0;
  double median_meta = 0.0;
  double median_scratch = 0.0;
  double median_fnn = 0.0;
};

// For every held-out task and seed: few-shot samples drawn from the task's
// training split, then adaptation of the meta-initialised GCN, a randomly
// initialised GCN and a randomly initialised feedforward baseline, each
// evaluated on the task's test split.
AdaptationStudy adaptation_study(const Scenario& scenario, const Eigen::VectorXd& meta_theta,
                                 std::span<const meta::Task> held_out, std::span<const std::uint64_t> seeds);

void write_adaptation_study(std::ostream& out, const AdaptationStudy& study);

struct StructureChange {
  ChainGraph before;
  ChainGraph after;
  double gcn_loss_before_change = 0.0;  // adapted GCN on the old structure
  double gcn_loss_at_change = 0.0;      // same parameters on the new structure
  double gcn_loss_after = 0.0;          // after re-adaptation on the new structure
  int gcn_steps = -1;                   // -1 when the budget ran out
  double fnn_loss_before_change = 0.0;  // feedforward net trained on the old structure
  double fnn_loss_after = 0.0;          // unchanged parameters on the new structure
  bool fnn_scores_ignore_edges = false;  // raw scores identical under either edge set
  double threshold = 0.0;
  int budget = 0;
};

// The first chain of the scenario with its services' tier-0 profiles is
// served first as a series chain, then with its real edges. Both allocators
// are fitted on the series version; only the GCN re-adapts after the change.
StructureChange structure_change_study(const Scenario& scenario, const Eigen::VectorXd& meta_theta, std::uint64_t seed);

struct VariantPair {
  std::uint64_t seed = 0;
  RunReport partial;
  RunReport plain;
};

// Trains a fresh agent per variant and seed, then evaluates it greedily.
std::vector<VariantPair> compare_variants(const Scenario& scenario, const Eigen::VectorXd& meta_theta,
                                          std::span<const std::uint64_t> seeds);

double median(std::vector<double> values);

}  // namespace sloscale::orch
