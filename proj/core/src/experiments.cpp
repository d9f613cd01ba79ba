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

#include "sloscale/experiments.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <random>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "sloscale/error.hpp"
#include "sloscale/fnn_baseline.hpp"
#include "sloscale/random.hpp"

namespace sloscale::orch {

namespace {

std::vector<gcn::LabeledSample> few_shot(const meta::Task& task, int count, std::uint64_t seed) {
  std::vector<gcn::LabeledSample> pool = task.train;
  std::mt19937_64 rng(seed);
  std::shuffle(pool.begin(), pool.end(), rng);
  pool.resize(std::min<std::size_t>(pool.size(), static_cast<std::size_t>(std::max(count, 1))));
  return pool;
}

int steps_or_censored(const meta::Adaptation& a, int budget) {
  return a.diagnostics.steps_to_threshold < 0 ? budget + 1 : a.diagnostics.steps_to_threshold;
}

meta::Task structure_task(const Scenario& scenario, const sim::Chain& chain, const ChainGraph& graph,
                          const std::string& id, std::uint64_t seed) {
  oracle::TaskSpec spec;
  spec.id = id;
  spec.graph = graph;
  for (int s : chain.services) {
    const auto& tier = scenario.services[static_cast<std::size_t>(s)].tiers.front();
    spec.base_profiles.push_back(tier.llp);
    spec.cores.push_back(tier.cpu_cores);
  }
  spec.jitter = scenario.tasks.jitter;
  spec.load = scenario.tasks.load;
  spec.budget_factor = scenario.tasks.budget_factor;
  oracle::Dataset ds = oracle::gen_dataset(spec, scenario.tasks.samples_per_task, seed);
  std::vector<gcn::LabeledSample> samples;
  for (const auto& rec : ds.records) samples.push_back(gcn::make_labeled(rec, scenario.features));
  return meta::split_task(id, graph, std::move(samples), derive_seed(seed, 7));
}

}  // namespace

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

MetaResult train_meta(const Scenario& scenario, std::uint64_t seed) {
  const auto pool = build_tasks(scenario, false, seed);
  gcn::GcnModel model(scenario.gcn);
  auto trained = meta::meta_train(model, model.init_params(derive_seed(seed, 11)), pool, scenario.meta, seed);
  MetaResult out{std::move(trained.theta), std::move(trained.curve), {}};
  for (const auto& t : pool) out.tasks.push_back({t.id, t.graph});
  return out;
}

AdaptationStudy adaptation_study(const Scenario& scenario, const Eigen::VectorXd& meta_theta,
                                 std::span<const meta::Task> held_out, std::span<const std::uint64_t> seeds) {
  gcn::GcnModel gcn(scenario.gcn);
  gcn::FnnModel fnn;
  AdaptationStudy study;
  study.budget = scenario.meta.adapt_steps_budget;
  study.threshold = scenario.allocator.loss_threshold;
  std::vector<double> m, s, f;
  for (const auto& task : held_out) {
    for (std::uint64_t seed : seeds) {
      const auto shots = few_shot(task, scenario.allocator.few_shot, derive_seed(seed, 1));
      const auto init = derive_seed(seed, 2);
      const double thr = study.threshold;
      AdaptationTrial trial{task.id, seed, 0, 0, 0};
      trial.meta_steps =
          steps_or_censored(meta::adapt_to_new_task(gcn, meta_theta, shots, scenario.meta, thr, task.test), study.budget);
      trial.scratch_steps = steps_or_censored(
          meta::adapt_to_new_task(gcn, gcn.init_params(init), shots, scenario.meta, thr, task.test), study.budget);
      trial.fnn_steps = steps_or_censored(
          meta::adapt_to_new_task(fnn, fnn.init_params(init), shots, scenario.meta, thr, task.test), study.budget);
      m.push_back(trial.meta_steps);
      s.push_back(trial.scratch_steps);
      f.push_back(trial.fnn_steps);
      study.trials.push_back(std::move(trial));
    }
  }
  study.median_meta = median(m);
  study.median_scratch = median(s);
  study.median_fnn = median(f);
  return study;
}

void write_adaptation_study(std::ostream& out, const AdaptationStudy& study) {
  out << "task_id,seed,meta_steps,scratch_steps,fnn_steps\n";
  for (const auto& t : study.trials) {
    out << fmt::format("{},{},{},{},{}\n", t.task_id, t.seed, t.meta_steps, t.scratch_steps, t.fnn_steps);
  }
}

StructureChange structure_change_study(const Scenario& scenario, const Eigen::VectorXd& meta_theta,
                                       std::uint64_t seed) {
  const sim::Chain& chain = scenario.chains.front();
  StructureChange out;
  out.after = chain.graph;
  out.before = ChainGraph::series(chain.graph.node_count());
  if (out.before == out.after) {
    throw Error(ErrorCode::kConfigInvalid, "structure change study needs a chain that is not a series chain");
  }
  out.threshold = scenario.allocator.loss_threshold;
  out.budget = scenario.meta.adapt_steps_budget;

  const meta::Task old_task = structure_task(scenario, chain, out.before, "before", derive_seed(seed, 1));
  const meta::Task new_task = structure_task(scenario, chain, out.after, "after", derive_seed(seed, 2));

  // Both allocators converge on the old structure first.
  meta::MetaConfig fit = scenario.meta;
  fit.adapt_steps_budget = 5 * scenario.meta.adapt_steps_budget;
  gcn::GcnModel gcn(scenario.gcn);
  const auto gcn_old = meta::adapt_to_new_task(gcn, meta_theta, old_task.train, fit, 0.0, old_task.test).theta;
  gcn::FnnModel fnn;
  const auto fnn_old =
      meta::adapt_to_new_task(fnn, fnn.init_params(derive_seed(seed, 3)), old_task.train, fit, 0.0, old_task.test).theta;
  out.gcn_loss_before_change = gcn.loss(gcn_old, old_task.test, nullptr);
  out.fnn_loss_before_change = fnn.loss(fnn_old, old_task.test, nullptr);

  out.gcn_loss_at_change = gcn.loss(gcn_old, new_task.test, nullptr);
  const auto shots = few_shot(new_task, scenario.allocator.few_shot, derive_seed(seed, 4));
  const auto re = meta::adapt_to_new_task(gcn, gcn_old, shots, scenario.meta, out.threshold, new_task.test);
  out.gcn_steps = re.diagnostics.steps_to_threshold;
  out.gcn_loss_after = re.diagnostics.loss.back();

  out.fnn_loss_after = fnn.loss(fnn_old, new_task.test, nullptr);
  out.fnn_scores_ignore_edges = true;
  for (const auto& ls : new_task.test) {
    gcn::GraphSample swapped = ls.sample;
    swapped.adjacency = out.before.adjacency();
    if (fnn.forward(fnn_old, swapped) != fnn.forward(fnn_old, ls.sample)) out.fnn_scores_ignore_edges = false;
  }
  return out;
}

std::vector<VariantPair> compare_variants(const Scenario& scenario, const Eigen::VectorXd& meta_theta,
                                          std::span<const std::uint64_t> seeds) {
  std::vector<VariantPair> out;
  const int actions = 2 * static_cast<int>(scenario.services.size());
  for (std::uint64_t seed : seeds) {
    VariantPair pair;
    pair.seed = seed;
    for (Variant v : {Variant::kPartialSlo, Variant::kPlain}) {
      rl::Td3Agent agent(state_dim(scenario, v), actions, scenario.td3, seed);
      RunReport r = run(scenario, RunMode::kTrain, v, seed, meta_theta, agent);
      const RunSummary s = summarize(r);
      spdlog::info("seed {} {}: violation rate {:.4f}, cost {:.4f}", seed, variant_name(v), s.violation_rate,
                   s.mean_normalized_cost);
      (v == Variant::kPartialSlo ? pair.partial : pair.plain) = std::move(r);
    }
    out.push_back(std::move(pair));
  }
  return out;
}

}  // namespace sloscale::orch
