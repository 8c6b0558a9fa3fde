#pragma once

#include <vector>

#include "d2d/scenario.hpp"
#include "d2d/state.hpp"

namespace d2d {

// Time / energy / weighted overhead of one processing or transmission step.
// Infeasible steps (zero rate, zero CPU) carry +inf time and overhead.
struct OverheadTerm {
  double time_s = 0.0;
  double energy_j = 0.0;
  double overhead = 0.0;

  bool finite() const;
  static OverheadTerm infinite();
  // Y = (1 - beta) T + beta E.
  static OverheadTerm weighted(double time_s, double energy_j, double beta);
};

struct TaskOverhead {
  int task = 0;
  int destination = 0;
  int subchannel = kNoSubchannel;
  double rate_bps = 0.0;  // 0 for local tasks
  OverheadTerm comm;      // zero for local tasks
  OverheadTerm comp;
  double total() const { return comm.overhead + comp.overhead; }
};

struct OverheadReport {
  std::vector<TaskOverhead> tasks;
  double comm_total = 0.0;
  double comp_total = 0.0;
  double total = 0.0;
  double time_total = 0.0;
  double energy_total = 0.0;
  bool feasible = true;
};

// SINR of stream k -> kp on subchannel `sub`, with the combiner stored in
// `beams` for (kp, sub). Throws InvalidState if the stream is not active or the
// combiner is zero.
double sinr(int k, int kp, int sub, const AllocationState& alloc, const BeamformingState& beams,
            const ChannelSet& channels, double noise_power_w);

// W log2(1 + SINR) for offloading transmitter k on its allocated subchannel.
double rate(int k, const AllocationState& alloc, const BeamformingState& beams, const ChannelSet& channels,
            const NetworkScenario& scenario);

// Computation overhead of task k processed at kp with `cpu_hz` cycles/s.
OverheadTerm comp_overhead(int k, int kp, double cpu_hz, const NetworkScenario& scenario);

// Communication overhead from transmit power, circuit power and rate.
OverheadTerm comm_overhead_from_rate(int k, double rate_bps, double tx_power_w, const NetworkScenario& scenario);

OverheadTerm comm_overhead(int k, const AllocationState& alloc, const BeamformingState& beams,
                           const ChannelSet& channels, const NetworkScenario& scenario);

// Network total: local tasks contribute computation only, offloaded tasks
// communication plus computation.
OverheadReport total_overhead(const AllocationState& alloc, const BeamformingState& beams,
                              const ChannelSet& channels, const NetworkScenario& scenario);

inline OverheadReport total_overhead(const AllocationState& alloc, const BeamformingState& beams,
                                     const NetworkScenario& scenario) {
  return total_overhead(alloc, beams, scenario.channels, scenario);
}

}  // namespace d2d
