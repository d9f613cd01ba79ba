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

// sloscale: dataset generation, meta-training, agent training, runs and the
// evaluation table.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "sloscale/error.hpp"
#include "sloscale/experiments.hpp"
#include "sloscale/meta_learner.hpp"
#include "sloscale/orchestrator.hpp"
#include "sloscale/random.hpp"
#include "sloscale/scenario.hpp"
#include "sloscale/slo_oracle.hpp"
#include "sloscale/td3.hpp"

namespace fs = std::filesystem;
using namespace sloscale;

namespace {

struct Options {
  std::string scenario;
  std::vector<std::uint64_t> seeds;
  std::string out = "out";
  std::vector<std::string> overrides;
  std::string meta;
  std::string agent;
  std::string variant = "partial-slo";
  std::string log_level = "warn";
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--scenario", o.scenario, "Scenario JSON file")->required();
  cmd->add_option("--seed", o.seeds, "Seed; repeat for several (default 1)");
  cmd->add_option("--out", o.out, "Output directory")->capture_default_str();
  cmd->add_option("--override", o.overrides, "Scenario override key=value, dotted keys; repeatable");
  cmd->add_option("--log-level", o.log_level, "trace, debug, info, warn, error or off")->capture_default_str();
}

void add_variant(CLI::App* cmd, Options& o) {
  cmd->add_option("--variant", o.variant, "Control-loop variant")
      ->check(CLI::IsMember({"partial-slo", "plain"}))
      ->capture_default_str();
  cmd->add_option("--meta", o.meta, "Meta checkpoint; trained in-process when absent");
}

fs::path prepare_out(const Options& o) {
  std::error_code ec;
  fs::create_directories(o.out, ec);
  if (ec) throw Error(ErrorCode::kIo, fmt::format("cannot create output directory {}: {}", o.out, ec.message()));
  return fs::path(o.out);
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIo, fmt::format("cannot open {} for writing", path.string()));
  body(f);
  f.flush();
  if (!f) throw Error(ErrorCode::kIo, fmt::format("write to {} failed", path.string()));
}

std::ifstream open_input(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kConfigNotFound, fmt::format("cannot open {}", path));
  return f;
}

Eigen::VectorXd meta_theta(const orch::Scenario& sc, const Options& o, orch::Variant v) {
  if (v == orch::Variant::kPlain) return {};
  gcn::GcnModel model(sc.gcn);
  if (!o.meta.empty()) {
    auto f = open_input(o.meta);
    return meta::load_meta_checkpoint(f, model).theta;
  }
  spdlog::info("no --meta given; meta-training with seed {}", o.seeds.front());
  return orch::train_meta(sc, o.seeds.front()).theta;
}

std::string run_stem(const char* what, orch::Variant v, std::uint64_t seed) {
  return fmt::format("{}_{}_seed{}", what, orch::variant_name(v), seed);
}

void write_run(const fs::path& dir, const orch::RunReport& r, orch::Variant v) {
  write_file(dir / (run_stem("metrics", v, r.seed) + ".csv"), [&](std::ostream& s) { orch::write_metrics_csv(s, r); });
  write_file(dir / (run_stem("events", v, r.seed) + ".csv"), [&](std::ostream& s) { orch::write_events_csv(s, r); });
  write_file(dir / (run_stem("summary", v, r.seed) + ".txt"), [&](std::ostream& s) { orch::write_summary(s, r); });
}

int agent_actions(const orch::Scenario& sc) { return 2 * static_cast<int>(sc.services.size()); }

void cmd_gen_dataset(const orch::Scenario& sc, const Options& o) {
  const fs::path dir = prepare_out(o);
  for (std::uint64_t seed : o.seeds) {
    for (bool held_out : {false, true}) {
      const auto specs = make_task_specs(sc.tasks, held_out, seed);
      for (std::size_t i = 0; i < specs.size(); ++i) {
        const auto data_seed = derive_seed(seed, (held_out ? 1ULL << 32 : 0ULL) + i);
        const auto ds = oracle::gen_dataset(specs[i], sc.tasks.samples_per_task, data_seed);
        const auto name = fmt::format("dataset_{}_seed{}.txt", specs[i].id, seed);
        write_file(dir / name, [&](std::ostream& s) { oracle::write_dataset(s, ds.records); });
        std::cout << fmt::format("{} samples={} skipped={}\n", name, ds.records.size(), ds.skipped);
      }
    }
  }
}

void cmd_train_meta(const orch::Scenario& sc, const Options& o) {
  const fs::path dir = prepare_out(o);
  gcn::GcnModel model(sc.gcn);
  for (std::uint64_t seed : o.seeds) {
    const auto r = orch::train_meta(sc, seed);
    write_file(dir / fmt::format("meta_seed{}.ckpt", seed),
               [&](std::ostream& s) { meta::save_meta_checkpoint(s, model, r.theta, sc.meta, r.tasks); });
    write_file(dir / fmt::format("meta_curve_seed{}.csv", seed), [&](std::ostream& s) {
      s << "iteration,test_loss\n";
      for (std::size_t i = 0; i < r.curve.size(); ++i) s << fmt::format("{},{:.9g}\n", i, r.curve[i]);
    });
    std::cout << fmt::format("seed {}: meta loss {:.6g} -> {:.6g}\n", seed, r.curve.empty() ? 0.0 : r.curve.front(),
                             r.curve.empty() ? 0.0 : r.curve.back());
  }
}

void cmd_train_rl(const orch::Scenario& sc, const Options& o) {
  const fs::path dir = prepare_out(o);
  const auto v = orch::parse_variant(o.variant);
  const auto theta = meta_theta(sc, o, v);
  for (std::uint64_t seed : o.seeds) {
    rl::Td3Agent agent(orch::state_dim(sc, v), agent_actions(sc), sc.td3, seed);
    const auto log = orch::train_agent(sc, v, theta, agent, seed);
    write_file(dir / (run_stem("agent", v, seed) + ".ckpt"), [&](std::ostream& s) { agent.save(s); });
    write_file(dir / (run_stem("training", v, seed) + ".csv"), [&](std::ostream& s) { rl::write_training_log(s, log); });
    std::cout << fmt::format("seed {}: {} episodes, last return {:.4f}\n", seed, log.size(),
                             log.empty() ? 0.0 : log.back().episode_return);
  }
}

void cmd_run(const orch::Scenario& sc, const Options& o) {
  const fs::path dir = prepare_out(o);
  const auto v = orch::parse_variant(o.variant);
  const auto theta = meta_theta(sc, o, v);
  bool failed = false;
  for (std::uint64_t seed : o.seeds) {
    rl::Td3Agent agent(orch::state_dim(sc, v), agent_actions(sc), sc.td3, seed);
    orch::RunReport r;
    if (o.agent.empty()) {
      r = orch::run(sc, orch::RunMode::kTrain, v, seed, theta, agent);
    } else {
      auto f = open_input(o.agent);
      agent.load(f);
      r = orch::evaluate(sc, v, theta, agent, seed);
    }
    write_run(dir, r, v);
    orch::write_summary(std::cout, r);
    if (!r.complete && r.error_code) {
      failed = true;
      std::cerr << "error_code=" << error_code_name(*r.error_code) << ": " << r.error << '\n';
    }
  }
  if (failed) throw Error(ErrorCode::kNumericFailure, "run ended early");
}

void cmd_eval(const orch::Scenario& sc, const Options& o) {
  const fs::path dir = prepare_out(o);
  const std::uint64_t first = o.seeds.front();
  const auto meta_run = orch::train_meta(sc, first);
  const auto held_out = orch::build_tasks(sc, true, first);
  const auto study = orch::adaptation_study(sc, meta_run.theta, held_out, o.seeds);
  write_file(dir / "adaptation.csv", [&](std::ostream& s) { orch::write_adaptation_study(s, study); });

  const auto pairs = orch::compare_variants(sc, meta_run.theta, o.seeds);
  std::vector<double> viol_partial, viol_plain, cost_partial, cost_plain;
  for (const auto& p : pairs) {
    write_run(dir, p.partial, orch::Variant::kPartialSlo);
    write_run(dir, p.plain, orch::Variant::kPlain);
    const auto a = orch::summarize(p.partial);
    const auto b = orch::summarize(p.plain);
    viol_partial.push_back(a.violation_rate);
    viol_plain.push_back(b.violation_rate);
    cost_partial.push_back(a.mean_normalized_cost);
    cost_plain.push_back(b.mean_normalized_cost);
  }

  std::ostringstream t;
  t << "scenario: " << sc.name << '\n';
  t << "seeds:";
  for (auto s : o.seeds) t << ' ' << s;
  t << '\n';
  t << fmt::format("meta_curve: {:.6g} -> {:.6g} over {} iterations\n", meta_run.curve.front(), meta_run.curve.back(),
                   meta_run.curve.size());
  t << fmt::format("adaptation: tasks={} threshold={:.3g} budget={}\n", held_out.size(), study.threshold, study.budget);
  t << fmt::format("adaptation_median_steps: meta={:.1f} scratch={:.1f} fnn={:.1f}\n", study.median_meta,
                   study.median_scratch, study.median_fnn);
  t << fmt::format("adaptation_ratio_meta_over_scratch: {:.4f}\n",
                   study.median_scratch > 0 ? study.median_meta / study.median_scratch : 0.0);
  if (!sc.chains.front().graph.is_series()) {
    const auto c = orch::structure_change_study(sc, meta_run.theta, first);
    t << fmt::format("structure_change: gcn_loss {:.6g} -> {:.6g} -> {:.6g} steps={} fnn_loss {:.6g} -> {:.6g} "
                     "fnn_ignores_edges={}\n",
                     c.gcn_loss_before_change, c.gcn_loss_at_change, c.gcn_loss_after, c.gcn_steps,
                     c.fnn_loss_before_change, c.fnn_loss_after, c.fnn_scores_ignore_edges ? "yes" : "no");
  }
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    t << fmt::format("seed {}: violation_rate partial-slo={:.6f} plain={:.6f} cost partial-slo={:.6f} plain={:.6f}\n",
                     pairs[i].seed, viol_partial[i], viol_plain[i], cost_partial[i], cost_plain[i]);
  }
  t << fmt::format("median_violation_rate: partial-slo={:.6f} plain={:.6f}\n", orch::median(viol_partial),
                   orch::median(viol_plain));
  t << fmt::format("median_normalized_cost: partial-slo={:.6f} plain={:.6f}\n", orch::median(cost_partial),
                   orch::median(cost_plain));
  write_file(dir / "eval_summary.txt", [&](std::ostream& s) { s << t.str(); });
  std::cout << t.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SLO-aware autoscaling of microservice chains"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "sloscale 0.1.0");
  Options o;
  using Handler = void (*)(const orch::Scenario&, const Options&);
  std::vector<std::pair<CLI::App*, Handler>> commands;

  auto* gen = app.add_subcommand("gen-dataset", "Label allocation problems of the task suite with the oracle");
  add_common(gen, o);
  commands.emplace_back(gen, cmd_gen_dataset);

  auto* tm = app.add_subcommand("train-meta", "Meta-train the graph allocator on the task suite");
  add_common(tm, o);
  commands.emplace_back(tm, cmd_train_meta);

  auto* trl = app.add_subcommand("train-rl", "Train a scaling agent and save its checkpoint");
  add_common(trl, o);
  add_variant(trl, o);
  commands.emplace_back(trl, cmd_train_rl);

  auto* run = app.add_subcommand("run", "Run the scripted scenario and write metrics");
  add_common(run, o);
  add_variant(run, o);
  run->add_option("--agent", o.agent, "Agent checkpoint; trained in-process when absent");
  commands.emplace_back(run, cmd_run);

  auto* ev = app.add_subcommand("eval", "Adaptation study, structure change and variant comparison");
  add_common(ev, o);
  commands.emplace_back(ev, cmd_eval);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error_code=" << error_code_name(ErrorCode::kInvalidArgument) << ": " << e.what() << '\n';
    return exit_status(ErrorCode::kInvalidArgument);
  }

  try {
    const auto level = spdlog::level::from_str(o.log_level);
    spdlog::set_default_logger(spdlog::stderr_color_mt("sloscale"));
    spdlog::set_level(level);
    if (o.seeds.empty()) o.seeds.push_back(1);
    const auto sc = orch::load_scenario(o.scenario, o.overrides);
    for (const auto& [cmd, handler] : commands) {
      if (cmd->parsed()) handler(sc, o);
    }
  } catch (const Error& e) {
    std::cerr << "error_code=" << error_code_name(e.code()) << ": " << e.what() << '\n';
    return exit_status(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error_code=" << error_code_name(ErrorCode::kIo) << ": " << e.what() << '\n';
    return exit_status(ErrorCode::kIo);
  }
  return 0;
}
