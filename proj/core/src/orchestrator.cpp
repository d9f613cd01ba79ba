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

#include "sloscale/orchestrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "sloscale/random.hpp"
#include "sloscale/slo_oracle.hpp"

namespace sloscale::orch {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::size_t kForecastWindow = 16;
constexpr int kForecastOrder = 3;
// Headroom over the workload peak used to normalize load features.
constexpr double kLoadHeadroom = 1.25;

std::string join_ints(const std::vector<int>& v, const std::vector<std::string>* names = nullptr) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ';';
    out += names ? (*names)[static_cast<std::size_t>(v[i])] : std::to_string(v[i]);
  }
  return out;
}

std::string fmt_value(double v) { return std::isnan(v) ? std::string() : fmt::format("{:.10g}", v); }

}  // namespace

const char* variant_name(Variant v) { return v == Variant::kPartialSlo ? "partial-slo" : "plain"; }

Variant parse_variant(const std::string& name) {
  if (name == "partial-slo") return Variant::kPartialSlo;
  if (name == "plain") return Variant::kPlain;
  throw Error(ErrorCode::kConfigInvalid, "unknown variant '" + name + "' (partial-slo or plain)");
}

const char* event_kind_name(EventKind k) {
  switch (k) {
    case EventKind::kLlpChanged:
      return "llp_changed";
    case EventKind::kVerticalScaled:
      return "vertical_scaled";
    case EventKind::kPeriodic:
      return "periodic";
    case EventKind::kReallocation:
      return "reallocation";
  }
  return "unknown";
}

RunSummary summarize(const RunReport& report) {
  RunSummary s;
  s.ticks = static_cast<int>(report.ticks.size());
  long chain_ticks = 0;
  long violations = 0;
  double cost = 0.0;
  for (const auto& t : report.ticks) {
    chain_ticks += static_cast<long>(t.chain_violation.size());
    violations += std::accumulate(t.chain_violation.begin(), t.chain_violation.end(), 0L);
    cost += t.normalized_cost;
    if (!std::isnan(t.reward)) s.total_reward += t.reward;
  }
  if (chain_ticks > 0) s.violation_rate = static_cast<double>(violations) / static_cast<double>(chain_ticks);
  if (s.ticks > 0) s.mean_normalized_cost = cost / s.ticks;
  long steps = 0;
  long adaptations = 0;
  for (const auto& e : report.events) {
    if (e.kind != EventKind::kReallocation) continue;
    ++s.reallocations;
    for (int st : e.adapt_steps) {
      steps += st;
      ++adaptations;
    }
  }
  if (adaptations > 0) s.mean_adaptation_steps = static_cast<double>(steps) / static_cast<double>(adaptations);
  return s;
}

void write_metrics_csv(std::ostream& out, const RunReport& report) {
  out << "tick,service,replicas,tier,offered_load,forecast_load,utilization,p99_ms,slo_partial_ms,"
         "chain_violations,cost_cores,normalized_cost,reward\n";
  for (const auto& t : report.ticks) {
    const int violations = std::accumulate(t.chain_violation.begin(), t.chain_violation.end(), 0);
    for (std::size_t s = 0; s < t.services.size(); ++s) {
      const auto& v = t.services[s];
      out << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{}\n", t.tick, report.service_names[s], v.replicas,
                         v.tier, fmt_value(v.offered_load), fmt_value(v.forecast_load), fmt_value(v.utilization),
                         fmt_value(v.p99_ms), fmt_value(v.slo_partial_ms), violations, fmt_value(t.cost_cores),
                         fmt_value(t.normalized_cost), fmt_value(t.reward));
    }
  }
}

void write_events_csv(std::ostream& out, const RunReport& report) {
  out << "tick,kind,services,chains,adapt_steps,adapt_loss\n";
  for (const auto& e : report.events) {
    std::string losses;
    for (std::size_t i = 0; i < e.adapt_loss.size(); ++i) {
      if (i) losses += ';';
      losses += fmt::format("{:.6g}", e.adapt_loss[i]);
    }
    out << fmt::format("{},{},{},{},{},{}\n", e.tick, event_kind_name(e.kind), join_ints(e.services, &report.service_names),
                       join_ints(e.chains, &report.chain_names), join_ints(e.adapt_steps), losses);
  }
}

void write_summary(std::ostream& out, const RunReport& report) {
  const RunSummary s = summarize(report);
  out << "scenario: " << report.scenario << '\n';
  out << "variant: " << report.variant << '\n';
  out << "seed: " << report.seed << '\n';
  out << "ticks: " << s.ticks << '\n';
  out << fmt::format("violation_rate: {:.6f}\n", s.violation_rate);
  out << fmt::format("mean_normalized_cost: {:.6f}\n", s.mean_normalized_cost);
  out << "reallocations: " << s.reallocations << '\n';
  out << fmt::format("mean_adaptation_steps: {:.3f}\n", s.mean_adaptation_steps);
  out << fmt::format("total_reward: {:.6f}\n", s.total_reward);
  out << "complete: " << (report.complete ? "yes" : "no") << '\n';
  if (report.error_code) out << "error_code: " << error_code_name(*report.error_code) << '\n';
}

Comparison compare_runs(const RunReport& a, const RunReport& b) {
  Comparison c{summarize(a), summarize(b)};
  c.violation_rate_delta = c.a.violation_rate - c.b.violation_rate;
  c.cost_delta = c.a.mean_normalized_cost - c.b.mean_normalized_cost;
  c.adaptation_steps_delta = c.a.mean_adaptation_steps - c.b.mean_adaptation_steps;
  return c;
}

void write_comparison(std::ostream& out, const Comparison& c, const std::string& label_a, const std::string& label_b) {
  out << fmt::format("{:<24}{:>14}{:>14}{:>14}\n", "metric", label_a, label_b, "delta");
  out << fmt::format("{:<24}{:>14.6f}{:>14.6f}{:>14.6f}\n", "violation_rate", c.a.violation_rate, c.b.violation_rate,
                     c.violation_rate_delta);
  out << fmt::format("{:<24}{:>14.6f}{:>14.6f}{:>14.6f}\n", "normalized_cost", c.a.mean_normalized_cost,
                     c.b.mean_normalized_cost, c.cost_delta);
  out << fmt::format("{:<24}{:>14.3f}{:>14.3f}{:>14.3f}\n", "adaptation_steps", c.a.mean_adaptation_steps,
                     c.b.mean_adaptation_steps, c.adaptation_steps_delta);
}

ClusterEnv::ClusterEnv(const Scenario& scenario, Variant variant, std::uint64_t seed, Eigen::VectorXd meta_theta)
    : scenario_(scenario), variant_(variant), seed_(seed), gcn_(scenario.gcn), meta_theta_(std::move(meta_theta)) {
  if (variant_ == Variant::kPartialSlo &&
      meta_theta_.size() != static_cast<Eigen::Index>(gcn_.layout().size())) {
    throw Error(ErrorCode::kConfigInvalid, "partial-slo variant needs meta-trained allocator parameters");
  }
  const std::size_t n_services = scenario_.services.size();
  Workload probe(scenario_, seed_);
  max_load_.assign(n_services, 0.0);
  e2e_slo_.assign(n_services, std::numeric_limits<double>::infinity());
  for (std::size_t c = 0; c < scenario_.chains.size(); ++c) {
    for (int s : scenario_.chains[c].services) {
      max_load_[static_cast<std::size_t>(s)] += probe.peak()[c] * kLoadHeadroom;
      e2e_slo_[static_cast<std::size_t>(s)] = std::min(e2e_slo_[static_cast<std::size_t>(s)], scenario_.chains[c].slo_ms);
    }
  }
  for (std::size_t s = 0; s < n_services; ++s) {
    if (!std::isfinite(e2e_slo_[s])) {
      throw Error(ErrorCode::kConfigInvalid, "service " + scenario_.services[s].name + " is on no chain");
    }
    max_load_[s] = std::max(max_load_[s], 1.0);
  }
}

int ClusterEnv::state_dim() const {
  return static_cast<int>(scenario_.services.size()) *
         rl::features_per_service(variant_ == Variant::kPartialSlo ? rl::StateMode::kPartialSlo : rl::StateMode::kPlain);
}

bool ClusterEnv::done() const { return static_cast<int>(report_.ticks.size()) >= scenario_.horizon; }

Eigen::VectorXd ClusterEnv::reset() {
  ++episode_;
  const auto ep = static_cast<std::uint64_t>(episode_);
  std::mt19937_64 rng(derive_seed(seed_, 3 * ep + 2));
  auto services = scenario_.services;
  if (training_ && scenario_.training.randomize_initial_replicas) {
    for (auto& s : services) s.initial_replicas = std::uniform_int_distribution<int>(1, s.max_replicas)(rng);
  }
  state_ = sim::make_cluster(std::move(services), scenario_.machines);
  schedule_ = scenario_.mutations;
  if (training_ && scenario_.training.randomize_mutations) {
    const double j = scenario_.training.factor_jitter;
    std::uniform_real_distribution<double> u(1.0 - j, 1.0 + j);
    for (auto& m : schedule_) m.factor = std::clamp(m.factor * u(rng), 0.3, 3.0);
  }
  workload_.emplace(scenario_, derive_seed(seed_, 3 * ep));
  simulator_.emplace(derive_seed(seed_, 3 * ep + 1), scenario_.sim);
  forecasters_.assign(scenario_.chains.size(), forecast::Forecaster(kForecastWindow, kForecastOrder));
  forecast_.assign(scenario_.chains.size(), 0.0);
  detectors_.assign(scenario_.chains.size(), meta::ShiftDetector(static_cast<std::size_t>(scenario_.allocator.shift_window)));
  chain_theta_.assign(scenario_.chains.size(), meta_theta_);
  slo_partial_.clear();
  allocator_runs_ = 0;
  realloc_counter_ = 0;
  report_ = RunReport{};
  report_.scenario = scenario_.name;
  report_.variant = variant_name(variant_);
  report_.seed = seed_;
  for (const auto& s : scenario_.services) report_.service_names.push_back(s.name);
  for (const auto& c : scenario_.chains) report_.chain_names.push_back(c.name);
  if (scenario_.horizon == 0) return Eigen::VectorXd::Zero(state_dim());
  simulate_and_monitor(true);
  return observe();
}

rl::StepOutcome ClusterEnv::step(const Eigen::VectorXd& action) {
  if (action.size() != action_dim()) throw Error(ErrorCode::kShapeMismatch, "ClusterEnv::step: action size");
  if (done()) throw Error(ErrorCode::kInvalidArgument, "ClusterEnv::step: episode is over");
  auto decisions = rl::decode_action(action, scenario_.control.max_delta, scenario_.control.dead_zone);
  sim::ScalingResult scaled = sim::apply_scaling(state_, decisions);
  state_ = std::move(scaled.state);
  for (const auto& note : scaled.clamps) {
    spdlog::debug("tick {}: service {} scaling clamped ({})", state_.tick, note.service, note.reason);
  }
  simulate_and_monitor(false);
  const TickRecord& t = report_.ticks.back();
  rl::StepOutcome out;
  out.state = observe();
  out.reward = t.reward;
  out.done = done();
  out.violations = std::accumulate(t.chain_violation.begin(), t.chain_violation.end(), 0);
  out.normalized_cost = t.normalized_cost;
  return out;
}

oracle::AllocationProblem ClusterEnv::chain_problem(int chain, double load) const {
  const sim::Chain& c = scenario_.chains[static_cast<std::size_t>(chain)];
  oracle::AllocationProblem p;
  p.graph = c.graph;
  p.budget_ms = c.slo_ms;
  for (int s : c.services) {
    const auto& tier = state_.current_tier(s);
    p.profiles.push_back(tier.llp);
    p.cores.push_back(tier.cpu_cores);
    p.loads.push_back(std::max(load, 0.0));
  }
  if (!(oracle::base_latency_floor(p) < p.budget_ms)) {
    throw Error(ErrorCode::kInfeasible,
                fmt::format("chain {}: SLO {} ms is below the base latency floor", c.name, c.slo_ms));
  }
  return p;
}

void ClusterEnv::simulate_and_monitor(bool startup) {
  for (const auto& m : schedule_) {
    if (m.tick == state_.tick) sim::mutate_environment(state_, m);
  }
  const std::vector<double> arrivals = workload_->arrivals(state_.tick);
  last_ = simulator_->simulate_tick(state_, scenario_.chains, arrivals);
  const std::int64_t tick = state_.tick;

  // Monitor.
  std::set<int> affected;
  for (const auto& change : state_.pending_changes) {
    report_.events.push_back({tick, EventKind::kLlpChanged, change.services, {}, {}, {}});
    affected.insert(change.services.begin(), change.services.end());
  }
  state_.pending_changes.clear();
  std::vector<int> vertical;
  for (std::size_t s = 0; s < state_.runtime.size(); ++s) {
    if (state_.runtime[s].vertically_scaled) {
      vertical.push_back(static_cast<int>(s));
      state_.runtime[s].vertically_scaled = false;
    }
  }
  if (!vertical.empty()) {
    report_.events.push_back({tick, EventKind::kVerticalScaled, vertical, {}, {}, {}});
    affected.insert(vertical.begin(), vertical.end());
  }

  for (std::size_t c = 0; c < scenario_.chains.size(); ++c) {
    forecasters_[c].observe(tick, arrivals[c]);
    forecast_[c] = forecasters_[c].forecast();
  }

  if (variant_ == Variant::kPartialSlo) {
    std::vector<int> chains;
    if (startup) {
      std::vector<int> all(scenario_.services.size());
      std::iota(all.begin(), all.end(), 0);
      report_.events.push_back({tick, EventKind::kPeriodic, all, {}, {}, {}});
      chains.resize(scenario_.chains.size());
      std::iota(chains.begin(), chains.end(), 0);
    } else {
      for (std::size_t c = 0; c < scenario_.chains.size(); ++c) {
        const auto& svc = scenario_.chains[c].services;
        if (std::any_of(svc.begin(), svc.end(), [&](int s) { return affected.count(s) > 0; })) {
          chains.push_back(static_cast<int>(c));
        }
      }
      if (scenario_.allocator.shift_detection) {
        std::vector<int> drifted;
        for (std::size_t c = 0; c < scenario_.chains.size(); ++c) {
          if (std::find(chains.begin(), chains.end(), static_cast<int>(c)) != chains.end()) continue;
          detectors_[c].observe(chain_allocation_error(static_cast<int>(c), arrivals[c]));
          if (detectors_[c].shifted(scenario_.meta.shift_threshold)) drifted.push_back(static_cast<int>(c));
        }
        if (!drifted.empty()) {
          std::set<int> svc;
          for (int c : drifted) svc.insert(scenario_.chains[c].services.begin(), scenario_.chains[c].services.end());
          report_.events.push_back({tick, EventKind::kPeriodic, {svc.begin(), svc.end()}, {}, {}, {}});
          chains.insert(chains.end(), drifted.begin(), drifted.end());
          std::sort(chains.begin(), chains.end());
        }
      }
    }
    if (!chains.empty()) reallocate(chains, tick);
    update_slo_partial();
  }

  TickRecord rec;
  rec.tick = tick;
  rec.arrivals = arrivals;
  rec.chain_p99_ms = last_.chain_p99_ms;
  rec.chain_violation = last_.chain_violation;
  for (std::size_t s = 0; s < state_.runtime.size(); ++s) {
    const auto& rt = state_.runtime[s];
    ServiceTick st;
    st.replicas = rt.replicas;
    st.tier = rt.tier;
    st.offered_load = rt.offered_load;
    st.utilization = rt.utilization;
    st.p99_ms = rt.p99_ms;
    st.slo_partial_ms = slo_partial_.empty() ? kNaN : slo_partial_[s];
    for (std::size_t c = 0; c < scenario_.chains.size(); ++c) {
      const auto& svc = scenario_.chains[c].services;
      if (std::find(svc.begin(), svc.end(), static_cast<int>(s)) != svc.end()) st.forecast_load += forecast_[c];
    }
    rec.services.push_back(st);
  }
  rec.cost_cores = last_.cost_cores;
  rec.normalized_cost = last_.normalized_cost;
  rec.reward = startup ? kNaN : compute_reward(last_);
  report_.ticks.push_back(std::move(rec));
}

void ClusterEnv::reallocate(const std::vector<int>& chains, std::int64_t tick) {
  EventRecord ev{tick, EventKind::kReallocation, {}, chains, {}, {}};
  std::set<int> services;
  for (int c : chains) {
    const sim::Chain& chain = scenario_.chains[static_cast<std::size_t>(c)];
    services.insert(chain.services.begin(), chain.services.end());
    const double load = std::max(forecast_[static_cast<std::size_t>(c)], 1.0);
    const oracle::AllocationProblem current = chain_problem(c, load);
    oracle::TaskSpec spec;
    spec.id = chain.name;
    spec.graph = chain.graph;
    spec.cores = current.cores;
    spec.base_profiles = current.profiles;
    spec.jitter = scenario_.allocator.sample_jitter;
    const double spread = scenario_.allocator.load_spread;
    spec.load = {load * (1.0 - spread), load * (1.0 + spread)};
    const double factor = current.budget_ms / oracle::base_latency_floor(current);
    spec.budget_factor = {factor, factor};
    spec.max_replicas = std::numeric_limits<int>::max();
    const auto draw_seed = derive_seed(seed_, 1000003ULL * static_cast<std::uint64_t>(episode_ + 1) +
                                                  static_cast<std::uint64_t>(realloc_counter_++));
    oracle::Dataset few = oracle::gen_dataset(spec, scenario_.allocator.few_shot, draw_seed);
    std::vector<gcn::LabeledSample> samples;
    for (const auto& rec : few.records) samples.push_back(gcn::make_labeled(rec, scenario_.features));
    if (samples.empty()) {
      spdlog::warn("tick {}: no feasible few-shot samples for chain {}; keeping the meta initialization", tick,
                   chain.name);
      chain_theta_[static_cast<std::size_t>(c)] = meta_theta_;
      ev.adapt_steps.push_back(0);
      ev.adapt_loss.push_back(kNaN);
      continue;
    }
    meta::Adaptation a = meta::adapt_to_new_task(gcn_, meta_theta_, samples, scenario_.meta,
                                                 scenario_.allocator.loss_threshold, {}, chain.name);
    chain_theta_[static_cast<std::size_t>(c)] = std::move(a.theta);
    ev.adapt_steps.push_back(static_cast<int>(a.diagnostics.loss.size()) - 1);
    ev.adapt_loss.push_back(a.diagnostics.loss.back());
    detectors_[static_cast<std::size_t>(c)].reset();
  }
  ev.services.assign(services.begin(), services.end());
  report_.events.push_back(std::move(ev));
  ++allocator_runs_;
}

void ClusterEnv::update_slo_partial() {
  slo_partial_.assign(scenario_.services.size(), std::numeric_limits<double>::infinity());
  for (std::size_t c = 0; c < scenario_.chains.size(); ++c) {
    const auto problem = chain_problem(static_cast<int>(c), forecast_[c]);
    const auto slo = gcn_.predict(chain_theta_[c], gcn::make_sample(problem, scenario_.features));
    const auto& svc = scenario_.chains[c].services;
    for (std::size_t i = 0; i < svc.size(); ++i) {
      auto& v = slo_partial_[static_cast<std::size_t>(svc[i])];
      v = std::min(v, slo[i]);
    }
  }
}

double ClusterEnv::chain_allocation_error(int chain, double load) {
  const auto problem = chain_problem(chain, load);
  const auto oracle_slo = oracle::allocate_gd(problem).relaxed_slo;
  const auto pred = gcn_.predict(chain_theta_[static_cast<std::size_t>(chain)], gcn::make_sample(problem, scenario_.features));
  return gcn::allocation_loss(pred, oracle_slo, problem.budget_ms);
}

Eigen::VectorXd ClusterEnv::observe() const {
  std::vector<rl::ServiceObservation> obs;
  for (std::size_t s = 0; s < scenario_.services.size(); ++s) {
    const auto& rt = state_.runtime[s];
    const auto& spec = state_.services[s];
    rl::ServiceObservation o;
    o.p99_ms = rt.p99_ms;
    o.e2e_slo_ms = e2e_slo_[s];
    o.slo_partial_ms = slo_partial_.empty() ? e2e_slo_[s] : slo_partial_[s];
    o.replicas = rt.replicas;
    o.max_replicas = spec.max_replicas;
    o.tier = rt.tier;
    o.max_tier = static_cast<int>(spec.tiers.size()) - 1;
    o.utilization = rt.utilization;
    o.predicted_load = report_.ticks.empty() ? 0.0 : report_.ticks.back().services[s].forecast_load;
    o.max_load = max_load_[s];
    obs.push_back(o);
  }
  return rl::build_state(obs, variant_ == Variant::kPartialSlo ? rl::StateMode::kPartialSlo : rl::StateMode::kPlain);
}

double ClusterEnv::compute_reward(const sim::TickMetrics& m) const {
  std::vector<double> rt;
  std::vector<double> slo;
  if (variant_ == Variant::kPartialSlo) {
    rt = m.service_p99_ms;
    slo = slo_partial_;
  } else {
    rt = m.chain_p99_ms;
    for (const auto& c : scenario_.chains) slo.push_back(c.slo_ms);
  }
  return rl::reward(rt, slo, m.service_utilization, scenario_.control.v_pref);
}

int state_dim(const Scenario& scenario, Variant variant) {
  return static_cast<int>(scenario.services.size()) *
         rl::features_per_service(variant == Variant::kPartialSlo ? rl::StateMode::kPartialSlo : rl::StateMode::kPlain);
}

std::vector<rl::EpisodeStats> train_agent(const Scenario& scenario, Variant variant, const Eigen::VectorXd& meta_theta,
                                          rl::Td3Agent& agent, std::uint64_t seed) {
  ClusterEnv env(scenario, variant, seed, meta_theta);
  env.set_training(true);
  std::vector<rl::EpisodeStats> log;
  for (int e = 0; e < scenario.training.episodes; ++e) {
    log.push_back(rl::train_episode(env, agent, std::max(scenario.horizon - 1, 0), e));
    spdlog::debug("episode {}: return {:.4f} violations {} cost {:.4f}", e, log.back().episode_return,
                  log.back().violations, log.back().mean_cost);
  }
  return log;
}

RunReport evaluate(const Scenario& scenario, Variant variant, const Eigen::VectorXd& meta_theta, rl::Td3Agent& agent,
                   std::uint64_t seed) {
  ClusterEnv env(scenario, variant, seed, meta_theta);
  try {
    Eigen::VectorXd s = env.reset();
    while (!env.done()) s = env.step(agent.act(s, false)).state;
  } catch (const Error& e) {
    RunReport partial = env.report();
    partial.complete = false;
    partial.error_code = e.code();
    partial.error = e.what();
    return partial;
  }
  return env.report();
}

RunReport run(const Scenario& scenario, RunMode mode, Variant variant, std::uint64_t seed,
              const Eigen::VectorXd& meta_theta, rl::Td3Agent& agent, std::vector<rl::EpisodeStats>* log) {
  if (mode == RunMode::kTrain) {
    auto episodes = train_agent(scenario, variant, meta_theta, agent, seed);
    if (log) *log = std::move(episodes);
  }
  return evaluate(scenario, variant, meta_theta, agent, seed);
}

std::vector<meta::Task> build_tasks(const Scenario& scenario, bool held_out, std::uint64_t seed) {
  std::vector<meta::Task> tasks;
  const auto specs = make_task_specs(scenario.tasks, held_out, seed);
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto data_seed = derive_seed(seed, (held_out ? 1ULL << 32 : 0ULL) + i);
    oracle::Dataset ds = oracle::gen_dataset(specs[i], scenario.tasks.samples_per_task, data_seed);
    std::vector<gcn::LabeledSample> samples;
    for (const auto& rec : ds.records) samples.push_back(gcn::make_labeled(rec, scenario.features));
    tasks.push_back(meta::split_task(specs[i].id, specs[i].graph, std::move(samples), derive_seed(data_seed, 7)));
  }
  return tasks;
}

}  // namespace sloscale::orch
