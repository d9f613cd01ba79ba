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

#include "sloscale/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "sloscale/error.hpp"
#include "sloscale/random.hpp"

namespace sloscale::orch {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorCode::kConfigInvalid, "scenario: " + what); }

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) invalid(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      invalid(fmt::format("unknown key '{}' in {}", key, where));
    }
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    invalid(fmt::format("{}.{} has the wrong type", where, key));
  }
}

template <typename T>
T require(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) invalid(fmt::format("{} needs '{}'", where, key));
  T out{};
  read(obj, key, out, where);
  return out;
}

void read_range(const json& obj, const char* key, oracle::Range& out, const std::string& where) {
  if (!obj.contains(key)) return;
  std::vector<double> v;
  read(obj, key, v, where);
  if (v.size() != 2 || !(v[0] <= v[1])) invalid(fmt::format("{}.{} must be [lo, hi] with lo <= hi", where, key));
  out = {v[0], v[1]};
}

ChainGraph parse_graph(const json& node, int default_nodes, const std::string& where) {
  int n = default_nodes;
  if (node.is_object() && node.contains("nodes")) read(node, "nodes", n, where);
  std::vector<Edge> edges;
  const json* e = node.is_object() && node.contains("edges") ? &node.at("edges") : nullptr;
  if (e == nullptr) return ChainGraph::series(n);
  try {
    for (const auto& pair : *e) {
      auto v = pair.get<std::vector<int>>();
      if (v.size() != 2) invalid(where + ": each edge is [from, to]");
      edges.emplace_back(v[0], v[1]);
    }
  } catch (const json::exception&) {
    invalid(where + ": edges must be [[from, to], ...]");
  }
  std::sort(edges.begin(), edges.end());
  try {
    return ChainGraph(n, std::move(edges));
  } catch (const Error& err) {
    invalid(where + ": " + err.what());
  }
}

int service_index(const json& ref, const std::vector<sim::ServiceSpec>& services, const std::string& where) {
  if (ref.is_number_integer()) {
    int i = ref.get<int>();
    if (i < 0 || i >= static_cast<int>(services.size())) invalid(where + ": service index out of range");
    return i;
  }
  if (ref.is_string()) {
    auto name = ref.get<std::string>();
    for (std::size_t i = 0; i < services.size(); ++i) {
      if (services[i].name == name) return static_cast<int>(i);
    }
    invalid(where + ": unknown service '" + name + "'");
  }
  invalid(where + ": services are referenced by name or index");
}

void apply_override(json& doc, const std::string& item) {
  auto eq = item.find('=');
  if (eq == std::string::npos || eq == 0) invalid("override '" + item + "' is not key=value");
  std::string key = item.substr(0, eq);
  std::string text = item.substr(eq + 1);
  std::string pointer;
  std::stringstream parts(key);
  std::string part;
  while (std::getline(parts, part, '.')) {
    if (part.empty()) invalid("override key '" + key + "' has an empty segment");
    pointer += "/" + part;
  }
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  try {
    doc[json::json_pointer(pointer)] = value;
  } catch (const json::exception& e) {
    invalid("override '" + item + "': " + e.what());
  }
}

sim::ServiceSpec parse_service(const json& j, std::size_t index) {
  const std::string where = fmt::format("services[{}]", index);
  check_keys(j, {"name", "tiers", "max_replicas", "initial_replicas", "initial_tier"}, where);
  sim::ServiceSpec s;
  s.name = require<std::string>(j, "name", where);
  read(j, "max_replicas", s.max_replicas, where);
  read(j, "initial_replicas", s.initial_replicas, where);
  read(j, "initial_tier", s.initial_tier, where);
  if (!j.contains("tiers") || !j.at("tiers").is_array()) invalid(where + " needs a 'tiers' array");
  std::size_t t = 0;
  for (const auto& tj : j.at("tiers")) {
    const std::string tw = fmt::format("{}.tiers[{}]", where, t++);
    check_keys(tj, {"cpu_cores", "p1", "p2", "sigma"}, tw);
    sim::InstanceTier tier;
    tier.cpu_cores = require<double>(tj, "cpu_cores", tw);
    tier.llp.capacity_p1 = require<double>(tj, "p1", tw);
    tier.llp.base_latency_p2 = require<double>(tj, "p2", tw);
    read(tj, "sigma", tier.llp.noise_sigma, tw);
    s.tiers.push_back(tier);
  }
  return s;
}

}  // namespace

Scenario parse_scenario(const std::string& json_text, const std::filesystem::path& base_dir,
                        const std::vector<std::string>& overrides) {
  json doc = json::parse(json_text, nullptr, false);
  if (doc.is_discarded()) invalid("not valid JSON");
  for (const auto& o : overrides) apply_override(doc, o);
  check_keys(doc, {"name", "machines", "services", "chains", "workload", "mutations", "horizon", "sim", "control",
                   "features", "gcn", "allocator", "meta", "td3", "training", "tasks"},
             "scenario");
  Scenario sc;
  read(doc, "name", sc.name, "scenario");
  sc.machines = require<std::vector<double>>(doc, "machines", "scenario");
  sc.horizon = require<int>(doc, "horizon", "scenario");
  if (sc.horizon < 0) invalid("horizon must be >= 0");

  if (!doc.contains("services") || !doc.at("services").is_array()) invalid("needs a 'services' array");
  for (std::size_t i = 0; i < doc.at("services").size(); ++i) sc.services.push_back(parse_service(doc.at("services")[i], i));
  try {
    (void)sim::make_cluster(sc.services, sc.machines);
  } catch (const Error& e) {
    invalid(e.what());
  }

  if (!doc.contains("chains") || !doc.at("chains").is_array() || doc.at("chains").empty()) {
    invalid("needs a non-empty 'chains' array");
  }
  for (std::size_t c = 0; c < doc.at("chains").size(); ++c) {
    const json& cj = doc.at("chains")[c];
    const std::string where = fmt::format("chains[{}]", c);
    check_keys(cj, {"name", "services", "edges", "slo_ms"}, where);
    sim::Chain chain;
    chain.name = require<std::string>(cj, "name", where);
    chain.slo_ms = require<double>(cj, "slo_ms", where);
    if (!(chain.slo_ms > 0.0)) invalid(where + ": slo_ms must be positive");
    if (!cj.contains("services") || !cj.at("services").is_array() || cj.at("services").empty()) {
      invalid(where + " needs a non-empty 'services' array");
    }
    for (const auto& ref : cj.at("services")) chain.services.push_back(service_index(ref, sc.services, where));
    std::set<int> unique(chain.services.begin(), chain.services.end());
    if (unique.size() != chain.services.size()) invalid(where + ": a service appears twice");
    json graph = json::object();
    graph["nodes"] = chain.services.size();
    if (cj.contains("edges")) graph["edges"] = cj.at("edges");
    chain.graph = parse_graph(graph, static_cast<int>(chain.services.size()), where);
    sc.chains.push_back(std::move(chain));
  }

  if (doc.contains("workload")) {
    const json& w = doc.at("workload");
    check_keys(w, {"kind", "base_rps", "amplitude", "period", "noise", "trace"}, "workload");
    std::string kind = "synthetic";
    read(w, "kind", kind, "workload");
    if (kind == "synthetic") {
      sc.workload.kind = WorkloadSpec::Kind::kSynthetic;
      sc.workload.base_rps = require<std::vector<double>>(w, "base_rps", "workload");
      if (sc.workload.base_rps.size() != sc.chains.size()) invalid("workload.base_rps needs one rate per chain");
      read(w, "amplitude", sc.workload.amplitude, "workload");
      read(w, "period", sc.workload.period, "workload");
      read(w, "noise", sc.workload.noise, "workload");
      if (!(sc.workload.period > 0.0) || sc.workload.noise < 0.0 || sc.workload.amplitude < 0.0) {
        invalid("workload: period must be positive, amplitude and noise non-negative");
      }
      for (double b : sc.workload.base_rps) {
        if (!(b >= 0.0)) invalid("workload.base_rps must be non-negative");
      }
    } else if (kind == "trace") {
      sc.workload.kind = WorkloadSpec::Kind::kTrace;
      std::filesystem::path p = require<std::string>(w, "trace", "workload");
      sc.workload.trace_path = p.is_absolute() || base_dir.empty() ? p : base_dir / p;
    } else {
      invalid("workload.kind must be 'synthetic' or 'trace'");
    }
  } else {
    invalid("needs a 'workload' object");
  }

  if (doc.contains("mutations")) {
    std::size_t m = 0;
    for (const auto& mj : doc.at("mutations")) {
      const std::string where = fmt::format("mutations[{}]", m++);
      check_keys(mj, {"tick", "at_fraction", "kind", "services", "factor", "scale_base_latency"}, where);
      sim::Mutation mut;
      if (mj.contains("tick")) {
        read(mj, "tick", mut.tick, where);
      } else if (mj.contains("at_fraction")) {
        double f = 0.0;
        read(mj, "at_fraction", f, where);
        if (!(f >= 0.0 && f <= 1.0)) invalid(where + ".at_fraction must lie in [0, 1]");
        mut.tick = static_cast<std::int64_t>(std::floor(f * sc.horizon));
      } else {
        invalid(where + " needs 'tick' or 'at_fraction'");
      }
      auto kind = require<std::string>(mj, "kind", where);
      if (kind == "version_upgrade") {
        mut.kind = sim::MutationKind::kVersionUpgrade;
      } else if (kind == "size_capacity_shift") {
        mut.kind = sim::MutationKind::kSizeCapacityShift;
      } else {
        invalid(where + ".kind must be 'version_upgrade' or 'size_capacity_shift'");
      }
      if (!mj.contains("services") || !mj.at("services").is_array()) invalid(where + " needs a 'services' array");
      for (const auto& ref : mj.at("services")) mut.services.push_back(service_index(ref, sc.services, where));
      mut.factor = require<double>(mj, "factor", where);
      if (!(mut.factor >= 0.3 && mut.factor <= 3.0)) invalid(where + ".factor must lie in [0.3, 3]");
      read(mj, "scale_base_latency", mut.scale_base_latency, where);
      sc.mutations.push_back(std::move(mut));
    }
    std::stable_sort(sc.mutations.begin(), sc.mutations.end(),
                     [](const sim::Mutation& a, const sim::Mutation& b) { return a.tick < b.tick; });
  }

  if (doc.contains("sim")) {
    const json& j = doc.at("sim");
    check_keys(j, {"min_samples", "max_samples"}, "sim");
    read(j, "min_samples", sc.sim.min_samples, "sim");
    read(j, "max_samples", sc.sim.max_samples, "sim");
    if (sc.sim.min_samples < 1 || sc.sim.max_samples < sc.sim.min_samples) invalid("sim: need 1 <= min_samples <= max_samples");
  }

  sc.control.v_pref.assign(sc.services.size(), 0.6);
  if (doc.contains("control")) {
    const json& j = doc.at("control");
    check_keys(j, {"v_pref", "max_delta", "dead_zone"}, "control");
    if (j.contains("v_pref")) {
      if (j.at("v_pref").is_number()) {
        sc.control.v_pref.assign(sc.services.size(), j.at("v_pref").get<double>());
      } else {
        read(j, "v_pref", sc.control.v_pref, "control");
      }
    }
    read(j, "max_delta", sc.control.max_delta, "control");
    read(j, "dead_zone", sc.control.dead_zone, "control");
  }
  if (sc.control.v_pref.size() != sc.services.size()) invalid("control.v_pref needs one value per service");
  for (double v : sc.control.v_pref) {
    if (!(v >= 0.0 && v <= 1.0)) invalid("control.v_pref values must lie in [0, 1]");
  }
  if (sc.control.max_delta < 1) invalid("control.max_delta must be >= 1");
  if (!(sc.control.dead_zone > 0.0)) invalid("control.dead_zone must be positive");

  if (doc.contains("features")) {
    const json& j = doc.at("features");
    check_keys(j, {"p1", "p2", "load", "budget", "path_nodes"}, "features");
    read_range(j, "p1", sc.features.capacity_p1, "features");
    read_range(j, "p2", sc.features.base_latency_p2, "features");
    read_range(j, "load", sc.features.load, "features");
    read_range(j, "budget", sc.features.budget, "features");
    read_range(j, "path_nodes", sc.features.path_nodes, "features");
  }

  if (doc.contains("gcn")) {
    const json& j = doc.at("gcn");
    check_keys(j, {"hidden", "global_hidden", "symmetrize"}, "gcn");
    read(j, "hidden", sc.gcn.hidden, "gcn");
    read(j, "global_hidden", sc.gcn.global_hidden, "gcn");
    read(j, "symmetrize", sc.gcn.symmetrize, "gcn");
    if (sc.gcn.hidden < 1 || sc.gcn.global_hidden < 1) invalid("gcn widths must be positive");
  }

  if (doc.contains("allocator")) {
    const json& j = doc.at("allocator");
    check_keys(j, {"few_shot", "loss_threshold", "sample_jitter", "load_spread", "shift_detection", "shift_window"},
               "allocator");
    read(j, "few_shot", sc.allocator.few_shot, "allocator");
    read(j, "loss_threshold", sc.allocator.loss_threshold, "allocator");
    read(j, "sample_jitter", sc.allocator.sample_jitter, "allocator");
    read(j, "load_spread", sc.allocator.load_spread, "allocator");
    read(j, "shift_detection", sc.allocator.shift_detection, "allocator");
    read(j, "shift_window", sc.allocator.shift_window, "allocator");
    if (sc.allocator.few_shot < 1 || sc.allocator.shift_window < 5) {
      invalid("allocator: few_shot must be >= 1 and shift_window >= 5");
    }
    if (!(sc.allocator.sample_jitter >= 0.0 && sc.allocator.sample_jitter < 1.0) ||
        !(sc.allocator.load_spread >= 0.0 && sc.allocator.load_spread < 1.0)) {
      invalid("allocator: sample_jitter and load_spread must lie in [0, 1)");
    }
  }

  if (doc.contains("meta")) {
    const json& j = doc.at("meta");
    check_keys(j, {"inner_lr", "outer_lr", "inner_steps", "tasks_per_batch", "meta_iterations", "shift_threshold",
                   "adapt_steps_budget"},
               "meta");
    read(j, "inner_lr", sc.meta.inner_lr, "meta");
    read(j, "outer_lr", sc.meta.outer_lr, "meta");
    read(j, "inner_steps", sc.meta.inner_steps, "meta");
    read(j, "tasks_per_batch", sc.meta.tasks_per_batch, "meta");
    read(j, "meta_iterations", sc.meta.meta_iterations, "meta");
    read(j, "shift_threshold", sc.meta.shift_threshold, "meta");
    read(j, "adapt_steps_budget", sc.meta.adapt_steps_budget, "meta");
  }
  meta::validate(sc.meta);

  if (doc.contains("td3")) {
    const json& j = doc.at("td3");
    check_keys(j, {"gamma", "tau", "target_noise_std", "target_noise_clip", "exploration_std", "policy_update",
                   "batch_size", "buffer_capacity", "hidden", "actor_lr", "critic_lr", "warmup", "preactivation_l2"},
               "td3");
    read(j, "gamma", sc.td3.gamma, "td3");
    read(j, "tau", sc.td3.tau, "td3");
    read(j, "target_noise_std", sc.td3.target_noise_std, "td3");
    read(j, "target_noise_clip", sc.td3.target_noise_clip, "td3");
    read(j, "exploration_std", sc.td3.exploration_std, "td3");
    read(j, "policy_update", sc.td3.policy_update, "td3");
    read(j, "batch_size", sc.td3.batch_size, "td3");
    read(j, "buffer_capacity", sc.td3.buffer_capacity, "td3");
    read(j, "hidden", sc.td3.hidden, "td3");
    read(j, "actor_lr", sc.td3.actor_lr, "td3");
    read(j, "critic_lr", sc.td3.critic_lr, "td3");
    read(j, "warmup", sc.td3.warmup, "td3");
    read(j, "preactivation_l2", sc.td3.preactivation_l2, "td3");
  }
  rl::validate(sc.td3);

  if (doc.contains("training")) {
    const json& j = doc.at("training");
    check_keys(j, {"episodes", "randomize_mutations", "factor_jitter", "randomize_initial_replicas"}, "training");
    read(j, "episodes", sc.training.episodes, "training");
    read(j, "randomize_mutations", sc.training.randomize_mutations, "training");
    read(j, "factor_jitter", sc.training.factor_jitter, "training");
    read(j, "randomize_initial_replicas", sc.training.randomize_initial_replicas, "training");
    if (sc.training.episodes < 0) invalid("training.episodes must be >= 0");
    if (!(sc.training.factor_jitter >= 0.0 && sc.training.factor_jitter < 1.0)) {
      invalid("training.factor_jitter must lie in [0, 1)");
    }
  }

  if (doc.contains("tasks")) {
    const json& j = doc.at("tasks");
    check_keys(j, {"structures", "train_tasks_per_structure", "held_out_tasks", "samples_per_task", "p1", "p2",
                   "load", "budget_factor", "jitter"},
               "tasks");
    if (j.contains("structures")) {
      std::size_t k = 0;
      for (const auto& sj : j.at("structures")) {
        const std::string where = fmt::format("tasks.structures[{}]", k++);
        check_keys(sj, {"nodes", "edges"}, where);
        sc.tasks.structures.push_back(parse_graph(sj, require<int>(sj, "nodes", where), where));
      }
    }
    read(j, "train_tasks_per_structure", sc.tasks.train_tasks_per_structure, "tasks");
    read(j, "held_out_tasks", sc.tasks.held_out_tasks, "tasks");
    read(j, "samples_per_task", sc.tasks.samples_per_task, "tasks");
    read_range(j, "p1", sc.tasks.capacity_p1, "tasks");
    read_range(j, "p2", sc.tasks.base_latency_p2, "tasks");
    read_range(j, "load", sc.tasks.load, "tasks");
    read_range(j, "budget_factor", sc.tasks.budget_factor, "tasks");
    read(j, "jitter", sc.tasks.jitter, "tasks");
    if (sc.tasks.samples_per_task < 10) invalid("tasks.samples_per_task must be >= 10");
  }
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfigNotFound, "scenario file not found: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  Scenario sc = parse_scenario(buf.str(), path.parent_path(), overrides);
  if (sc.name.empty()) sc.name = path.stem().string();
  return sc;
}

std::vector<std::vector<double>> read_trace(const std::filesystem::path& path, const std::vector<sim::Chain>& chains) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfigNotFound, "trace file not found: " + path.string());
  std::string line;
  if (!std::getline(in, line)) invalid("trace " + path.string() + " is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "tick,chain_id,arrival_rps") invalid("trace header must be 'tick,chain_id,arrival_rps'");
  std::map<std::int64_t, std::vector<double>> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string tick_s, chain_s, rate_s, extra;
    if (!std::getline(ss, tick_s, ',') || !std::getline(ss, chain_s, ',') || !std::getline(ss, rate_s, ',') ||
        std::getline(ss, extra, ',')) {
      invalid(fmt::format("trace line {}: expected 3 columns", line_no));
    }
    std::int64_t tick = 0;
    double rate = 0.0;
    try {
      std::size_t used = 0;
      tick = std::stoll(tick_s, &used);
      if (used != tick_s.size()) throw std::invalid_argument(tick_s);
      rate = std::stod(rate_s, &used);
      if (used != rate_s.size()) throw std::invalid_argument(rate_s);
    } catch (const std::exception&) {
      invalid(fmt::format("trace line {}: bad number", line_no));
    }
    if (tick < 0 || !(rate >= 0.0) || !std::isfinite(rate)) invalid(fmt::format("trace line {}: negative value", line_no));
    int chain = -1;
    for (std::size_t c = 0; c < chains.size(); ++c) {
      if (chains[c].name == chain_s) chain = static_cast<int>(c);
    }
    if (chain < 0) {
      try {
        std::size_t used = 0;
        chain = std::stoi(chain_s, &used);
        if (used != chain_s.size()) chain = -1;
      } catch (const std::exception&) {
        chain = -1;
      }
    }
    if (chain < 0 || chain >= static_cast<int>(chains.size())) {
      invalid(fmt::format("trace line {}: unknown chain '{}'", line_no, chain_s));
    }
    auto& row = rows[tick];
    if (row.empty()) row.assign(chains.size(), -1.0);
    if (row[static_cast<std::size_t>(chain)] >= 0.0) invalid(fmt::format("trace line {}: duplicate entry", line_no));
    row[static_cast<std::size_t>(chain)] = rate;
  }
  if (rows.empty()) invalid("trace " + path.string() + " has no rows");
  std::vector<std::vector<double>> out;
  for (const auto& [tick, row] : rows) {
    if (tick != static_cast<std::int64_t>(out.size())) invalid(fmt::format("trace: tick {} is missing", out.size()));
    if (std::any_of(row.begin(), row.end(), [](double v) { return v < 0.0; })) {
      invalid(fmt::format("trace: tick {} lacks a chain", tick));
    }
    out.push_back(row);
  }
  return out;
}

Workload::Workload(const Scenario& scenario, std::uint64_t seed) : spec_(scenario.workload), seed_(seed) {
  if (spec_.kind == WorkloadSpec::Kind::kTrace) {
    trace_ = read_trace(spec_.trace_path, scenario.chains);
    peak_.assign(scenario.chains.size(), 0.0);
    for (const auto& row : trace_) {
      for (std::size_t c = 0; c < row.size(); ++c) peak_[c] = std::max(peak_[c], row[c]);
    }
  } else {
    for (double b : spec_.base_rps) peak_.push_back(b * (1.0 + spec_.amplitude));
  }
}

std::vector<double> Workload::arrivals(std::int64_t tick) const {
  if (spec_.kind == WorkloadSpec::Kind::kTrace) {
    return trace_[static_cast<std::size_t>(tick % static_cast<std::int64_t>(trace_.size()))];
  }
  std::mt19937_64 rng(derive_seed(seed_, static_cast<std::uint64_t>(tick)));
  std::normal_distribution<double> z(0.0, 1.0);
  const double wave = 1.0 + spec_.amplitude * std::sin(2.0 * std::numbers::pi * static_cast<double>(tick) / spec_.period);
  std::vector<double> out;
  for (double b : spec_.base_rps) {
    const double noise = spec_.noise > 0.0 ? 1.0 + spec_.noise * z(rng) : 1.0;
    out.push_back(std::max(0.0, b * wave * noise));
  }
  return out;
}

std::vector<oracle::TaskSpec> make_task_specs(const TaskSuite& suite, bool held_out, std::uint64_t seed) {
  if (suite.structures.empty()) invalid("tasks.structures is empty");
  const int count = held_out ? suite.held_out_tasks
                             : suite.train_tasks_per_structure * static_cast<int>(suite.structures.size());
  std::mt19937_64 rng(derive_seed(seed, held_out ? 1 : 0));
  std::uniform_real_distribution<double> p1(suite.capacity_p1.lo, suite.capacity_p1.hi);
  std::uniform_real_distribution<double> p2(suite.base_latency_p2.lo, suite.base_latency_p2.hi);
  std::vector<oracle::TaskSpec> out;
  for (int i = 0; i < count; ++i) {
    oracle::TaskSpec spec;
    spec.id = fmt::format("{}{:03d}", held_out ? "held" : "train", i);
    spec.graph = suite.structures[static_cast<std::size_t>(i) % suite.structures.size()];
    spec.cores.assign(static_cast<std::size_t>(spec.graph.node_count()), 1.0);
    for (int v = 0; v < spec.graph.node_count(); ++v) {
      sim::LlpProfile prof;
      prof.capacity_p1 = p1(rng);
      prof.base_latency_p2 = p2(rng);
      spec.base_profiles.push_back(prof);
    }
    spec.jitter = suite.jitter;
    spec.load = suite.load;
    spec.budget_factor = suite.budget_factor;
    out.push_back(std::move(spec));
  }
  return out;
}

}  // namespace sloscale::orch
