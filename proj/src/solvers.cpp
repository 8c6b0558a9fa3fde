#include "d2d/solvers.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "d2d/errors.hpp"
#include "d2d/topology.hpp"

namespace d2d {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

bool receiver_taken(const AllocationState& alloc, int rx, int sub, int upto) {
  for (int l = 0; l < upto; ++l)
    if (alloc.destination(l) == rx && alloc.subchannel(l) == sub) return true;
  return false;
}

Solution make_solution(const AllocationState& alloc, const BeamformingState& beams, const ChannelSet& channels,
                       const NetworkScenario& scenario) {
  Solution s;
  s.alloc = alloc;
  s.beams = beams;
  s.report = total_overhead(alloc, beams, channels, scenario);
  return s;
}

Solution alternate_core(const NetworkScenario& scenario, const AlternateOptions& options, const ChannelSet& channels,
                        std::string_view name) {
  if (options.restarts < 1) throw InvalidParameter("restarts must be at least 1");
  if (!(options.tolerance > 0.0)) throw InvalidParameter("outer tolerance must be positive");
  if (options.max_outer < 1) throw InvalidParameter("max_outer must be at least 1");
  const auto start = std::chrono::steady_clock::now();
  const double noise = scenario.params.noise_power_w;

  Solution best = local_only(scenario, options.cpu_policy);
  for (int r = 0; r < options.restarts; ++r) {
    Rng rng = make_rng(options.seed, SeedStream::kSolver, static_cast<std::uint64_t>(r));
    AllocationState alloc = random_allocation(scenario.node_count(), scenario.subchannel_count(), rng);
    allocate_cpu(alloc, scenario, options.cpu_policy);
    BeamformingState beams = random_beams(scenario, rng);

    std::vector<double> trace;
    int mcob_iterations = 0;
    long long evaluations = 0;
    Solution run_best;
    run_best.report.total = kInf;
    auto consider = [&](const AllocationState& a, const BeamformingState& b) {
      Solution s = make_solution(a, b, channels, scenario);
      if (s.report.total < run_best.report.total) run_best = std::move(s);
    };

    for (int t = 1; t <= options.max_outer; ++t) {
      McobResult m = mcob(alloc, channels, scenario, beams, options.mcob);
      beams = std::move(m.beams);
      mcob_iterations += m.trace.iterations;
      refresh_combiners(alloc, beams, channels, noise);
      consider(alloc, beams);

      GreedyResult g = greedy_allocate(scenario, channels, beams, {options.cpu_policy, false});
      evaluations += g.evaluations;
      alloc = std::move(g.alloc);
      refresh_combiners(alloc, beams, channels, noise);
      const double y = total_overhead(alloc, beams, channels, scenario).total;
      consider(alloc, beams);
      const bool settled = !trace.empty() && std::abs(y - trace.back()) < options.tolerance;
      trace.push_back(y);
      if (settled) break;
    }

    if (run_best.report.total < best.report.total) {
      best = std::move(run_best);
      best.restart = r;
      best.outer_trace = trace;
      best.outer_iterations = static_cast<int>(trace.size());
      best.mcob_iterations = mcob_iterations;
      best.greedy_evaluations = evaluations;
    }
  }
  best.solver = std::string(name);
  best.wall_seconds = seconds_since(start);
  return best;
}

}  // namespace

std::string_view solver_name(SolverKind kind) {
  switch (kind) {
    case SolverKind::kAlternate: return "alternate";
    case SolverKind::kExhaustive: return "exhaustive";
    case SolverKind::kLocal: return "local";
    case SolverKind::kWmmse: return "wmmse";
    case SolverKind::kEqualCpu: return "equal-cpu";
  }
  return "unknown";
}

SolverKind parse_solver(std::string_view name) {
  for (SolverKind k : {SolverKind::kAlternate, SolverKind::kExhaustive, SolverKind::kLocal, SolverKind::kWmmse,
                       SolverKind::kEqualCpu})
    if (solver_name(k) == name) return k;
  throw InvalidParameter("unknown solver '" + std::string(name) + "'");
}

AllocationState random_allocation(int nodes, int subchannels, Rng& rng) {
  AllocationState alloc(nodes, subchannels);
  if (nodes < 2) return alloc;
  std::bernoulli_distribution local(0.5);
  std::uniform_int_distribution<int> pick(0, (nodes - 1) * subchannels - 1);
  for (int k = 0; k < nodes; ++k) {
    for (;;) {
      if (local(rng)) break;
      const int c = pick(rng);
      int rx = c / subchannels;
      if (rx >= k) ++rx;
      const int sub = c % subchannels;
      if (receiver_taken(alloc, rx, sub, k)) continue;
      alloc.assign_offload(k, rx, sub);
      break;
    }
  }
  return alloc;
}

Solution local_only(const NetworkScenario& scenario, CpuPolicy policy) {
  const auto start = std::chrono::steady_clock::now();
  AllocationState alloc(scenario.node_count(), scenario.subchannel_count());
  allocate_cpu(alloc, scenario, policy);
  const BeamformingState beams =
      BeamformingState::zeros(scenario.node_count(), scenario.subchannel_count(), scenario.antenna_count());
  Solution s = make_solution(alloc, beams, scenario.channels, scenario);
  s.solver = std::string(solver_name(SolverKind::kLocal));
  s.wall_seconds = seconds_since(start);
  return s;
}

Solution alternate_optimize(const NetworkScenario& scenario, const AlternateOptions& options,
                            const ChannelSet& channels) {
  return alternate_core(scenario, options, channels, solver_name(SolverKind::kAlternate));
}

Solution wmmse_baseline(const NetworkScenario& scenario, AlternateOptions options) {
  return wmmse_baseline(scenario, std::move(options), scenario.channels);
}

Solution wmmse_baseline(const NetworkScenario& scenario, AlternateOptions options, const ChannelSet& channels) {
  options.mcob.time_only = true;
  return alternate_core(scenario, options, channels, solver_name(SolverKind::kWmmse));
}

Solution equal_cpu_baseline(const NetworkScenario& scenario, AlternateOptions options) {
  return equal_cpu_baseline(scenario, std::move(options), scenario.channels);
}

Solution equal_cpu_baseline(const NetworkScenario& scenario, AlternateOptions options, const ChannelSet& channels) {
  options.cpu_policy = CpuPolicy::kEqual;
  return alternate_core(scenario, options, channels, solver_name(SolverKind::kEqualCpu));
}

double assignment_bound(int nodes, int subchannels) {
  return std::pow(static_cast<double>(nodes) * subchannels - subchannels + 1, nodes);
}

long long for_each_assignment(int nodes, int subchannels, const std::function<void(const AllocationState&)>& visit,
                              double cap) {
  if (nodes < 1 || subchannels < 1) throw InvalidParameter("enumeration needs K >= 1 and S >= 1");
  const double bound = assignment_bound(nodes, subchannels);
  if (bound > cap)
    throw TooLarge("assignment enumeration bound (KS-S+1)^K = " + std::to_string(bound) + " exceeds the cap " +
                   std::to_string(cap));
  // choice 0: local; choice c > 0: option c - 1 over (target != k, subchannel).
  const int options = (nodes - 1) * subchannels + 1;
  std::vector<int> choice(static_cast<size_t>(nodes), 0);
  long long visited = 0;
  for (;;) {
    AllocationState alloc(nodes, subchannels);
    bool ok = true;
    for (int k = 0; k < nodes && ok; ++k) {
      const int c = choice[static_cast<size_t>(k)];
      if (c == 0) continue;
      int rx = (c - 1) / subchannels;
      if (rx >= k) ++rx;
      const int sub = (c - 1) % subchannels;
      if (receiver_taken(alloc, rx, sub, k)) ok = false;
      else alloc.assign_offload(k, rx, sub);
    }
    if (ok) {
      visit(alloc);
      ++visited;
    }
    int k = 0;
    while (k < nodes && ++choice[static_cast<size_t>(k)] == options) choice[static_cast<size_t>(k++)] = 0;
    if (k == nodes) break;
  }
  return visited;
}

std::vector<AllocationState> enumerate_assignments(int nodes, int subchannels, double cap) {
  std::vector<AllocationState> out;
  for_each_assignment(nodes, subchannels, [&](const AllocationState& a) { out.push_back(a); }, cap);
  return out;
}

Solution exhaustive_optimize(const NetworkScenario& scenario, const ExhaustiveOptions& options,
                             const ChannelSet& channels) {
  const auto start = std::chrono::steady_clock::now();
  const double noise = scenario.params.noise_power_w;
  Solution best;
  best.report.total = kInf;
  std::uint64_t index = 0;
  for_each_assignment(
      scenario.node_count(), scenario.subchannel_count(),
      [&](const AllocationState& a) {
        const std::uint64_t this_index = index++;
        AllocationState alloc = a;
        try {
          allocate_cpu(alloc, scenario, CpuPolicy::kOptimal);
        } catch (const Infeasible&) {
          return;
        }
        Rng rng = make_rng(options.seed, SeedStream::kEnumeration, this_index);
        McobResult m = mcob(alloc, channels, scenario, random_beams(scenario, rng), options.mcob);
        refresh_combiners(alloc, m.beams, channels, noise);
        Solution s = make_solution(alloc, m.beams, channels, scenario);
        s.restart = static_cast<int>(this_index);
        s.mcob_iterations = m.trace.iterations;
        if (s.report.total < best.report.total) best = std::move(s);
      },
      options.cap);
  best.solver = std::string(solver_name(SolverKind::kExhaustive));
  best.outer_iterations = 1;
  best.outer_trace = {best.report.total};
  best.wall_seconds = seconds_since(start);
  return best;
}

Solution run_solver(SolverKind kind, const NetworkScenario& scenario, const AlternateOptions& options,
                    const ChannelSet& channels) {
  switch (kind) {
    case SolverKind::kAlternate: return alternate_optimize(scenario, options, channels);
    case SolverKind::kWmmse: return wmmse_baseline(scenario, options, channels);
    case SolverKind::kEqualCpu: return equal_cpu_baseline(scenario, options, channels);
    case SolverKind::kLocal: return local_only(scenario, options.cpu_policy);
    case SolverKind::kExhaustive: {
      ExhaustiveOptions ex;
      ex.seed = options.seed;
      ex.mcob.time_only = options.mcob.time_only;
      return exhaustive_optimize(scenario, ex, channels);
    }
  }
  throw InvalidParameter("unknown solver kind");
}

OverheadReport evaluate_on(const Solution& solution, const ChannelSet& channels, const NetworkScenario& scenario) {
  return total_overhead(solution.alloc, solution.beams, channels, scenario);
}

}  // namespace d2d
