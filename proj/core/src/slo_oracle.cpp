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

#include "sloscale/slo_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "sloscale/error.hpp"
#include "sloscale/random.hpp"

namespace sloscale::oracle {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> node_floors(const AllocationProblem& problem) {
  std::vector<double> floor(problem.profiles.size());
  for (std::size_t i = 0; i < floor.size(); ++i) {
    double p2 = problem.profiles[i].base_latency_p2;
    floor[i] = p2 * (1.0 + 1e-9) + 1e-9;
  }
  return floor;
}

double relaxed_cost(const AllocationProblem& problem, const std::vector<double>& slo) {
  double total = 0.0;
  for (std::size_t i = 0; i < slo.size(); ++i) {
    total += problem.cores[i] * relaxed_replicas(problem.profiles[i], problem.loads[i], slo[i]);
  }
  return total;
}

// Smallest partial SLO at which n replicas suffice.
double slo_for_replicas(const sim::LlpProfile& profile, double load, int n, double floor) {
  if (load <= 0.0) return floor;
  double rho = load / (n * profile.capacity_p1);
  if (rho >= 1.0) return kInf;
  return std::max(floor, profile.base_latency_p2 / (1.0 - rho));
}

double path_sum(const std::vector<int>& path, const std::vector<double>& slo) {
  double s = 0.0;
  for (int v : path) s += slo[v];
  return s;
}

// Each node keeps its value plus an equal share of the tightest slack among
// the paths through it.
std::vector<double> spread_slack(const AllocationProblem& problem, std::vector<double> slo) {
  const auto& paths = problem.graph.paths();
  std::vector<double> share(slo.size(), kInf);
  for (const auto& path : paths) {
    double slack = (problem.budget_ms - path_sum(path, slo)) / static_cast<double>(path.size());
    for (int v : path) share[v] = std::min(share[v], slack);
  }
  for (std::size_t i = 0; i < slo.size(); ++i) slo[i] += std::max(0.0, share[i]);
  return slo;
}

}  // namespace

void validate(const AllocationProblem& problem) {
  const auto n = static_cast<std::size_t>(problem.graph.node_count());
  if (n == 0 || problem.profiles.size() != n || problem.loads.size() != n || problem.cores.size() != n) {
    throw Error(ErrorCode::kShapeMismatch, "allocation problem: per-node vectors must match node count");
  }
  for (std::size_t i = 0; i < n; ++i) {
    sim::validate(problem.profiles[i]);
    if (!(problem.loads[i] >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "negative node load");
    if (!(problem.cores[i] > 0.0)) throw Error(ErrorCode::kInvalidArgument, "cores must be positive");
  }
  if (!(problem.budget_ms > base_latency_floor(problem))) {
    throw Error(ErrorCode::kInfeasible, "budget does not exceed the base latency of the longest path");
  }
}

double base_latency_floor(const AllocationProblem& problem) {
  double worst = 0.0;
  for (const auto& path : problem.graph.paths()) {
    double s = 0.0;
    for (int v : path) s += problem.profiles[v].base_latency_p2;
    worst = std::max(worst, s);
  }
  return worst;
}

double relaxed_replicas(const sim::LlpProfile& profile, double load, double partial_slo) {
  if (!(partial_slo > profile.base_latency_p2)) return kInf;
  double x = load / (profile.capacity_p1 * (1.0 - profile.base_latency_p2 / partial_slo));
  return std::max(1.0, x);
}

int replicas_needed(const sim::LlpProfile& profile, double load, double partial_slo) {
  if (!(partial_slo > profile.base_latency_p2)) {
    throw Error(ErrorCode::kInfeasible, "partial SLO must exceed the base latency");
  }
  double x = load / (profile.capacity_p1 * (1.0 - profile.base_latency_p2 / partial_slo));
  if (x > 1e9) throw Error(ErrorCode::kInfeasible, "replica count overflow");
  // Guard against x landing a rounding error above an exact integer.
  auto n = static_cast<int>(std::ceil(x * (1.0 - 1e-12)));
  return std::max(1, n);
}

double node_cost(const sim::LlpProfile& profile, double load, double partial_slo, double cores) {
  return replicas_needed(profile, load, partial_slo) * cores;
}

double allocation_cost(const AllocationProblem& problem, const std::vector<double>& partial_slo) {
  double total = 0.0;
  for (std::size_t i = 0; i < partial_slo.size(); ++i) {
    total += node_cost(problem.profiles[i], problem.loads[i], partial_slo[i], problem.cores[i]);
  }
  return total;
}

bool is_feasible(const AllocationProblem& problem, const std::vector<double>& partial_slo, double tol) {
  if (partial_slo.size() != problem.profiles.size()) return false;
  for (std::size_t i = 0; i < partial_slo.size(); ++i) {
    if (!(partial_slo[i] > problem.profiles[i].base_latency_p2)) return false;
  }
  for (const auto& path : problem.graph.paths()) {
    if (path_sum(path, partial_slo) > problem.budget_ms + tol) return false;
  }
  return true;
}

SloAllocation equal_split(const AllocationProblem& problem) {
  validate(problem);
  const auto& paths = problem.graph.paths();
  const std::size_t n = problem.profiles.size();
  std::vector<double> slo(n, kInf);
  for (const auto& path : paths) {
    for (int v : path) slo[v] = std::min(slo[v], problem.budget_ms / static_cast<double>(path.size()));
  }
  bool clears = true;
  for (std::size_t i = 0; i < n; ++i) clears = clears && slo[i] > problem.profiles[i].base_latency_p2;
  if (!clears) {
    std::vector<double> base(n);
    for (std::size_t i = 0; i < n; ++i) base[i] = problem.profiles[i].base_latency_p2;
    slo = spread_slack(problem, base);
  }
  return {slo, allocation_cost(problem, slo)};
}

std::vector<double> project_feasible(const AllocationProblem& problem, std::vector<double> x,
                                     const std::vector<double>& floor) {
  const auto& paths = problem.graph.paths();
  const std::size_t n = x.size();
  const double budget = problem.budget_ms;

  // Dykstra's alternating projections over the box and one halfspace per path.
  const std::size_t n_sets = paths.size() + 1;
  std::vector<std::vector<double>> increments(n_sets, std::vector<double>(n, 0.0));
  std::vector<double> z(n);
  for (int sweep = 0; sweep < 2000; ++sweep) {
    double change = 0.0;
    for (std::size_t set = 0; set < n_sets; ++set) {
      for (std::size_t i = 0; i < n; ++i) z[i] = x[i] + increments[set][i];
      std::vector<double> p = z;
      if (set == 0) {
        for (std::size_t i = 0; i < n; ++i) p[i] = std::max(p[i], floor[i]);
      } else {
        const auto& path = paths[set - 1];
        double excess = path_sum(path, p) - budget;
        if (excess > 0.0) {
          for (int v : path) p[v] -= excess / static_cast<double>(path.size());
        }
      }
      for (std::size_t i = 0; i < n; ++i) {
        increments[set][i] = z[i] - p[i];
        change = std::max(change, std::abs(p[i] - x[i]));
        x[i] = p[i];
      }
    }
    if (change < 1e-12 * (1.0 + budget)) break;
  }

  // Exact feasibility: clamp to the floor, then shrink path slack where a
  // path still exceeds the budget. Shrinking never raises another path.
  for (std::size_t i = 0; i < n; ++i) x[i] = std::max(x[i], floor[i]);
  for (const auto& path : paths) {
    double total = path_sum(path, x);
    if (total <= budget) continue;
    double floor_sum = 0.0;
    for (int v : path) floor_sum += floor[v];
    double kappa = (budget - floor_sum) / (total - floor_sum);
    for (int v : path) x[v] = floor[v] + kappa * (x[v] - floor[v]);
  }
  return x;
}

GdResult allocate_gd(const AllocationProblem& problem, const GdOptions& options) {
  validate(problem);
  const std::size_t n = problem.profiles.size();
  const std::vector<double> floor = node_floors(problem);
  const SloAllocation start = equal_split(problem);

  std::vector<double> x = project_feasible(problem, start.partial_slo, floor);
  double f = relaxed_cost(problem, x);
  double lr = options.lr;
  const double h = options.fd_step;

  GdResult result;
  std::vector<double> grad(n);
  std::vector<double> trial(n);
  for (int it = 1; it <= options.max_iters; ++it) {
    result.iterations = it;
    double gmax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& prof = problem.profiles[i];
      double up = relaxed_replicas(prof, problem.loads[i], x[i] + h);
      double down_at = x[i] - h;
      if (down_at > floor[i]) {
        double down = relaxed_replicas(prof, problem.loads[i], down_at);
        grad[i] = problem.cores[i] * (up - down) / (2.0 * h);
      } else {
        double here = relaxed_replicas(prof, problem.loads[i], x[i]);
        grad[i] = problem.cores[i] * (up - here) / h;
      }
      gmax = std::max(gmax, std::abs(grad[i]));
    }
    if (gmax == 0.0) {
      result.converged = true;
      break;
    }
    for (std::size_t i = 0; i < n; ++i) trial[i] = x[i] - lr * grad[i] / gmax;
    std::vector<double> next = project_feasible(problem, trial, floor);
    double f_next = relaxed_cost(problem, next);
    if (f_next < f) {
      double moved = 0.0;
      for (std::size_t i = 0; i < n; ++i) moved = std::max(moved, std::abs(next[i] - x[i]));
      x = std::move(next);
      f = f_next;
      lr *= 1.5;
      if (moved < options.tol) {
        result.converged = true;
        break;
      }
    } else {
      lr *= 0.5;
      if (lr < options.tol) {
        result.converged = true;
        break;
      }
    }
  }
  result.relaxed_slo = x;
  result.relaxed_cost = f;

  // Whole replicas at the fractional optimum, then tightened to the smallest
  // partial SLO each replica count needs.
  std::vector<int> reps(n);
  std::vector<double> slo(n);
  for (std::size_t i = 0; i < n; ++i) {
    reps[i] = replicas_needed(problem.profiles[i], problem.loads[i], x[i]);
    slo[i] = slo_for_replicas(problem.profiles[i], problem.loads[i], reps[i], floor[i]);
  }
  // Greedily drop single replicas while the freed budget allows.
  for (;;) {
    int best = -1;
    double best_gain = 0.0;
    double best_slo = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (reps[i] <= 1) continue;
      double need = slo_for_replicas(problem.profiles[i], problem.loads[i], reps[i] - 1, floor[i]);
      if (!std::isfinite(need)) continue;
      double saved = slo[i];
      slo[i] = need;
      bool fits = true;
      for (const auto& path : problem.graph.paths()) {
        fits = fits && path_sum(path, slo) <= problem.budget_ms;
      }
      slo[i] = saved;
      if (fits && problem.cores[i] > best_gain) {
        best = static_cast<int>(i);
        best_gain = problem.cores[i];
        best_slo = need;
      }
    }
    if (best < 0) break;
    --reps[best];
    slo[best] = best_slo;
  }
  slo = spread_slack(problem, slo);
  double cost = allocation_cost(problem, slo);
  if (start.total_cost < cost) {
    result.allocation = start;
  } else {
    result.allocation = {slo, cost};
  }
  return result;
}

SloAllocation allocate_grid(const AllocationProblem& problem, double step_ms) {
  validate(problem);
  const int n = problem.graph.node_count();
  if (n > 4) throw Error(ErrorCode::kInvalidArgument, "allocate_grid: at most 4 nodes");
  if (!(step_ms > 0.0)) throw Error(ErrorCode::kInvalidArgument, "allocate_grid: step must be positive");

  const auto& paths = problem.graph.paths();
  std::vector<std::vector<int>> node_paths(n);
  for (std::size_t p = 0; p < paths.size(); ++p) {
    for (int v : paths[p]) node_paths[v].push_back(static_cast<int>(p));
  }
  const auto k_budget = static_cast<long>(std::floor(problem.budget_ms / step_ms + 1e-9));
  std::vector<long> k_min(n);
  for (int i = 0; i < n; ++i) {
    double p2 = problem.profiles[i].base_latency_p2;
    long k = static_cast<long>(std::floor(p2 / step_ms)) + 1;
    while (static_cast<double>(k) * step_ms <= p2) ++k;
    k_min[i] = k;
  }

  auto cost_at = [&](int i, long k) {
    return node_cost(problem.profiles[i], problem.loads[i], static_cast<double>(k) * step_ms,
                     problem.cores[i]);
  };

  std::vector<long> k(n, 0);
  std::vector<long> best_k;
  double best_cost = kInf;

  // Largest lattice value node i may take given the assigned nodes and the
  // minimum of the nodes not yet assigned (index > i).
  auto upper = [&](int i) {
    long hi = k_budget;
    for (int p : node_paths[i]) {
      long rest = 0;
      for (int v : paths[p]) {
        if (v == i) continue;
        rest += v < i ? k[v] : k_min[v];
      }
      hi = std::min(hi, k_budget - rest);
    }
    return hi;
  };

  auto consider = [&](double cost) {
    if (cost < best_cost - 1e-9 || (std::abs(cost - best_cost) <= 1e-9 && k < best_k)) {
      best_cost = cost;
      best_k = k;
    }
  };

  auto recurse = [&](auto&& self, int i, double partial) -> void {
    long hi = upper(i);
    if (hi < k_min[i]) return;
    if (i == n - 1) {
      // Cost is non-increasing in the partial SLO: take the cheapest replica
      // count, then the smallest lattice value that still achieves it.
      int reps = replicas_needed(problem.profiles[i], problem.loads[i], static_cast<double>(hi) * step_ms);
      double need = slo_for_replicas(problem.profiles[i], problem.loads[i], reps, 0.0);
      long lo = std::clamp(static_cast<long>(std::ceil(need / step_ms - 1e-9)), k_min[i], hi);
      while (lo > k_min[i] &&
             replicas_needed(problem.profiles[i], problem.loads[i], static_cast<double>(lo - 1) * step_ms) <= reps) {
        --lo;
      }
      while (replicas_needed(problem.profiles[i], problem.loads[i], static_cast<double>(lo) * step_ms) > reps) {
        ++lo;
      }
      k[i] = lo;
      consider(partial + reps * problem.cores[i]);
      return;
    }
    for (long v = k_min[i]; v <= hi; ++v) {
      k[i] = v;
      self(self, i + 1, partial + cost_at(i, v));
    }
    k[i] = 0;
  };
  recurse(recurse, 0, 0.0);

  if (best_k.empty()) throw Error(ErrorCode::kInfeasible, "allocate_grid: no feasible lattice point");
  SloAllocation out;
  out.partial_slo.resize(n);
  for (int i = 0; i < n; ++i) out.partial_slo[i] = static_cast<double>(best_k[i]) * step_ms;
  out.total_cost = best_cost;
  return out;
}

Dataset gen_dataset(const TaskSpec& task, int n_samples, std::uint64_t seed) {
  const int n = task.graph.node_count();
  if (static_cast<int>(task.cores.size()) != n) {
    throw Error(ErrorCode::kShapeMismatch, "task " + task.id + ": cores per node must match node count");
  }
  const bool based = !task.base_profiles.empty();
  if (based && static_cast<int>(task.base_profiles.size()) != n) {
    throw Error(ErrorCode::kShapeMismatch, "task " + task.id + ": base profiles per node must match node count");
  }
  if (!(task.jitter >= 0.0 && task.jitter < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "task " + task.id + ": jitter must lie in [0, 1)");
  }
  Dataset out;
  for (int s = 0; s < n_samples; ++s) {
    sim::Rng rng(derive_seed(seed, static_cast<std::uint64_t>(s)));
    auto draw = [&rng](const Range& r) { return std::uniform_real_distribution<double>(r.lo, r.hi)(rng); };
    AllocationProblem problem;
    problem.graph = task.graph;
    problem.cores = task.cores;
    for (int i = 0; i < n; ++i) {
      sim::LlpProfile prof;
      if (based) {
        const Range scale{1.0 - task.jitter, 1.0 + task.jitter};
        prof.capacity_p1 = task.base_profiles[i].capacity_p1 * draw(scale);
        prof.base_latency_p2 = task.base_profiles[i].base_latency_p2 * draw(scale);
      } else {
        prof.capacity_p1 = draw(task.capacity_p1);
        prof.base_latency_p2 = draw(task.base_latency_p2);
      }
      problem.profiles.push_back(prof);
    }
    double load = draw(task.load);
    problem.loads.assign(n, load);
    double factor = draw(task.budget_factor);
    problem.budget_ms = factor * base_latency_floor(problem);
    try {
      GdResult gd = allocate_gd(problem);
      bool within = true;
      for (int i = 0; i < n; ++i) {
        within = within && replicas_needed(problem.profiles[i], load, gd.relaxed_slo[i]) <= task.max_replicas;
      }
      if (!within) {
        ++out.skipped;
        continue;
      }
      SloAllocation label{gd.relaxed_slo, allocation_cost(problem, gd.relaxed_slo)};
      out.records.push_back({task.id, std::move(problem), std::move(label)});
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kInfeasible) throw;
      ++out.skipped;
    }
  }
  if (out.skipped > 0) {
    spdlog::warn("gen_dataset: task {} skipped {} infeasible draws of {}", task.id, out.skipped, n_samples);
  }
  return out;
}

void write_dataset(std::ostream& out, const std::vector<DatasetRecord>& records) {
  out << kDatasetHeader << '\n';
  out << "#columns task_id|n_nodes|edges(from-to,...)|nodes(p1,p2,load,cores;...)"
         "|global(budget_ms,path_nodes)|label(partial_slo_ms,...)|cost_cores\n";
  for (const auto& rec : records) {
    const auto& pr = rec.problem;
    std::string line = rec.task_id + "|" + std::to_string(pr.graph.node_count()) + "|";
    if (pr.graph.edges().empty()) line += "-";
    for (std::size_t e = 0; e < pr.graph.edges().size(); ++e) {
      if (e) line += ',';
      line += fmt::format("{}-{}", pr.graph.edges()[e].first, pr.graph.edges()[e].second);
    }
    line += '|';
    for (std::size_t i = 0; i < pr.profiles.size(); ++i) {
      if (i) line += ';';
      line += fmt::format("{:.17g},{:.17g},{:.17g},{:.17g}", pr.profiles[i].capacity_p1,
                          pr.profiles[i].base_latency_p2, pr.loads[i], pr.cores[i]);
    }
    line += fmt::format("|{:.17g},{}|", pr.budget_ms, pr.graph.longest_path_nodes());
    for (std::size_t i = 0; i < rec.label.partial_slo.size(); ++i) {
      if (i) line += ',';
      line += fmt::format("{:.17g}", rec.label.partial_slo[i]);
    }
    line += fmt::format("|{:.17g}", rec.label.total_cost);
    out << line << '\n';
  }
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) parts.push_back(cur);
  if (!s.empty() && s.back() == sep) parts.emplace_back();
  return parts;
}

double to_double(const std::string& s) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::kConfigInvalid, "dataset: bad number '" + s + "'");
  }
}

}  // namespace

std::vector<DatasetRecord> read_dataset(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kDatasetHeader) {
    throw Error(ErrorCode::kConfigInvalid, "dataset: missing or unsupported version header");
  }
  std::vector<DatasetRecord> records;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto cols = split(line, '|');
    if (cols.size() != 7) throw Error(ErrorCode::kConfigInvalid, "dataset: expected 7 columns");
    DatasetRecord rec;
    rec.task_id = cols[0];
    int n = static_cast<int>(to_double(cols[1]));
    std::vector<Edge> edges;
    if (cols[2] != "-") {
      for (const auto& e : split(cols[2], ',')) {
        auto ends = split(e, '-');
        if (ends.size() != 2) throw Error(ErrorCode::kConfigInvalid, "dataset: bad edge");
        edges.emplace_back(static_cast<int>(to_double(ends[0])), static_cast<int>(to_double(ends[1])));
      }
    }
    rec.problem.graph = ChainGraph(n, std::move(edges));
    auto nodes = split(cols[3], ';');
    if (static_cast<int>(nodes.size()) != n) throw Error(ErrorCode::kConfigInvalid, "dataset: node row count");
    for (const auto& row : nodes) {
      auto v = split(row, ',');
      if (v.size() != 4) throw Error(ErrorCode::kConfigInvalid, "dataset: node row needs 4 values");
      rec.problem.profiles.push_back({to_double(v[0]), to_double(v[1]), 0.0});
      rec.problem.loads.push_back(to_double(v[2]));
      rec.problem.cores.push_back(to_double(v[3]));
    }
    auto global = split(cols[4], ',');
    if (global.size() != 2) throw Error(ErrorCode::kConfigInvalid, "dataset: global needs 2 values");
    rec.problem.budget_ms = to_double(global[0]);
    for (const auto& v : split(cols[5], ',')) rec.label.partial_slo.push_back(to_double(v));
    if (static_cast<int>(rec.label.partial_slo.size()) != n) {
      throw Error(ErrorCode::kConfigInvalid, "dataset: label length");
    }
    rec.label.total_cost = to_double(cols[6]);
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace sloscale::oracle
