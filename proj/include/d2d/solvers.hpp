#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "d2d/cpu_alloc.hpp"
#include "d2d/mcob.hpp"
#include "d2d/overhead.hpp"
#include "d2d/scenario.hpp"
#include "d2d/state.hpp"

namespace d2d {

enum class SolverKind { kAlternate, kExhaustive, kLocal, kWmmse, kEqualCpu };

std::string_view solver_name(SolverKind kind);
// Accepts the CLI spellings alternate|exhaustive|local|wmmse|equal-cpu.
SolverKind parse_solver(std::string_view name);

struct Solution {
  AllocationState alloc;
  BeamformingState beams;
  OverheadReport report;
  std::string solver;
  std::vector<double> outer_trace;  // Y_total after each outer iteration
  int restart = -1;                 // -1: the all-local candidate
  int outer_iterations = 0;
  int mcob_iterations = 0;          // summed over the winning restart
  long long greedy_evaluations = 0;
  double wall_seconds = 0.0;
};

struct AlternateOptions {
  int restarts = 10;
  std::uint64_t seed = 0;
  double tolerance = 1e-4;
  int max_outer = 20;
  McobOptions mcob;
  CpuPolicy cpu_policy = CpuPolicy::kOptimal;
};

// Random task / subchannel assignment: each node is local with probability
// 1/2, otherwise picks a uniform (target, subchannel) pair, redrawn while the
// pair would give its receiver two streams on one subchannel.
AllocationState random_allocation(int nodes, int subchannels, Rng& rng);

Solution local_only(const NetworkScenario& scenario, CpuPolicy policy = CpuPolicy::kOptimal);

// Alternates beamforming and greedy assignment from several random starts and
// returns the best pair seen (the all-local solution is always a candidate).
// `channels` is the channel knowledge used for optimisation; the report is
// evaluated on the same channels.
Solution alternate_optimize(const NetworkScenario& scenario, const AlternateOptions& options,
                            const ChannelSet& channels);
inline Solution alternate_optimize(const NetworkScenario& scenario, const AlternateOptions& options = {}) {
  return alternate_optimize(scenario, options, scenario.channels);
}

// Alternate optimisation with the beamforming step minimising transmission
// time only; the report still uses the true overhead factors.
Solution wmmse_baseline(const NetworkScenario& scenario, AlternateOptions options = {});
Solution wmmse_baseline(const NetworkScenario& scenario, AlternateOptions options, const ChannelSet& channels);

// Alternate optimisation with equal CPU shares everywhere.
Solution equal_cpu_baseline(const NetworkScenario& scenario, AlternateOptions options = {});
Solution equal_cpu_baseline(const NetworkScenario& scenario, AlternateOptions options, const ChannelSet& channels);

inline constexpr double kEnumerationCap = 1e7;

// (K S - S + 1)^K, the number of assignments before receiver filtering.
double assignment_bound(int nodes, int subchannels);

// Calls `visit` for every assignment satisfying one-destination,
// one-subchannel-iff-offloaded and receiver exclusivity, in odometer order
// (node 0 varies fastest). Returns the number visited. Throws TooLarge when
// the bound exceeds `cap`.
long long for_each_assignment(int nodes, int subchannels, const std::function<void(const AllocationState&)>& visit,
                              double cap = kEnumerationCap);
std::vector<AllocationState> enumerate_assignments(int nodes, int subchannels, double cap = kEnumerationCap);

// Beamforming per assignment runs to a much tighter stopping tolerance than
// inside the alternate loop, so each assignment gets a fully converged design.
// zeta sums squared multiplier changes, hence the very small threshold.
inline McobOptions converged_mcob_options() { return {20000, 1e-12, false}; }

struct ExhaustiveOptions {
  std::uint64_t seed = 0;
  McobOptions mcob = converged_mcob_options();
  double cap = kEnumerationCap;
};

// Every feasible assignment with optimal CPU shares and beamforming from a
// per-assignment derived seed; returns the minimum.
Solution exhaustive_optimize(const NetworkScenario& scenario, const ExhaustiveOptions& options,
                             const ChannelSet& channels);
inline Solution exhaustive_optimize(const NetworkScenario& scenario, const ExhaustiveOptions& options = {}) {
  return exhaustive_optimize(scenario, options, scenario.channels);
}

// Dispatch by kind with shared restart / seed settings.
Solution run_solver(SolverKind kind, const NetworkScenario& scenario, const AlternateOptions& options,
                    const ChannelSet& channels);

// Re-evaluates a solution's allocation and beamformers (combiners as stored)
// on another channel set, e.g. true channels after optimising on estimates.
OverheadReport evaluate_on(const Solution& solution, const ChannelSet& channels, const NetworkScenario& scenario);

}  // namespace d2d
