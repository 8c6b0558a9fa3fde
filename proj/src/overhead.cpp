#include "d2d/overhead.hpp"

#include <cmath>
#include <limits>

#include "d2d/errors.hpp"

namespace d2d {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

bool OverheadTerm::finite() const {
  return std::isfinite(time_s) && std::isfinite(energy_j) && std::isfinite(overhead);
}

OverheadTerm OverheadTerm::infinite() { return {kInf, kInf, kInf}; }

OverheadTerm OverheadTerm::weighted(double time_s, double energy_j, double beta) {
  return {time_s, energy_j, (1.0 - beta) * time_s + beta * energy_j};
}

double sinr(int k, int kp, int sub, const AllocationState& alloc, const BeamformingState& beams,
            const ChannelSet& channels, double noise_power_w) {
  if (alloc.destination(k) != kp || alloc.subchannel(k) != sub || k == kp)
    throw InvalidState("sinr requested for an inactive stream");
  const CVector& z = beams.combiner(kp, sub);
  const double z_norm2 = z.squaredNorm();
  if (z_norm2 == 0.0) throw InvalidState("sinr requested with a zero combiner");
  const double signal = std::norm(z.dot(channels(k, kp, sub) * beams.f[static_cast<size_t>(k)]));
  double interference = 0.0;
  for (int l = 0; l < alloc.nodes(); ++l) {
    if (l == k || alloc.subchannel(l) != sub) continue;
    interference += std::norm(z.dot(channels(l, kp, sub) * beams.f[static_cast<size_t>(l)]));
  }
  return signal / (interference + noise_power_w * z_norm2);
}

double rate(int k, const AllocationState& alloc, const BeamformingState& beams, const ChannelSet& channels,
            const NetworkScenario& scenario) {
  const int kp = alloc.destination(k);
  const int sub = alloc.subchannel(k);
  if (kp == k || sub == kNoSubchannel) throw InvalidState("rate requested for a local task");
  if (beams.combiner(kp, sub).squaredNorm() == 0.0) return 0.0;
  const double s = sinr(k, kp, sub, alloc, beams, channels, scenario.params.noise_power_w);
  return scenario.params.bandwidth_hz * std::log1p(s) / kLn2;
}

OverheadTerm comp_overhead(int k, int kp, double cpu_hz, const NetworkScenario& scenario) {
  const NodeProfile& task = scenario.nodes[static_cast<size_t>(k)];
  const NodeProfile& host = scenario.nodes[static_cast<size_t>(kp)];
  if (!(cpu_hz > 0.0)) return {kInf, 0.0, kInf};
  const double cycles = task.cycles_per_bit * task.task_bits;
  const double time = cycles / cpu_hz;
  const double energy = host.energy_coefficient * cpu_hz * cpu_hz * cycles;
  return OverheadTerm::weighted(time, energy, task.overhead_factor);
}

OverheadTerm comm_overhead_from_rate(int k, double rate_bps, double tx_power_w, const NetworkScenario& scenario) {
  if (!(rate_bps > 0.0)) return OverheadTerm::infinite();
  const NodeProfile& task = scenario.nodes[static_cast<size_t>(k)];
  const double time = task.task_bits / rate_bps;
  const double energy = (tx_power_w + scenario.params.circuit_power_w) * time;
  return OverheadTerm::weighted(time, energy, task.overhead_factor);
}

OverheadTerm comm_overhead(int k, const AllocationState& alloc, const BeamformingState& beams,
                           const ChannelSet& channels, const NetworkScenario& scenario) {
  const double r = rate(k, alloc, beams, channels, scenario);
  return comm_overhead_from_rate(k, r, beams.f[static_cast<size_t>(k)].squaredNorm(), scenario);
}

OverheadReport total_overhead(const AllocationState& alloc, const BeamformingState& beams,
                              const ChannelSet& channels, const NetworkScenario& scenario) {
  OverheadReport report;
  report.tasks.reserve(static_cast<size_t>(alloc.nodes()));
  for (int k = 0; k < alloc.nodes(); ++k) {
    TaskOverhead t;
    t.task = k;
    t.destination = alloc.destination(k);
    t.subchannel = alloc.subchannel(k);
    if (!alloc.is_local(k)) {
      t.rate_bps = rate(k, alloc, beams, channels, scenario);
      t.comm = comm_overhead_from_rate(k, t.rate_bps, beams.f[static_cast<size_t>(k)].squaredNorm(), scenario);
    }
    t.comp = comp_overhead(k, t.destination, alloc.cpu(k), scenario);
    report.comm_total += t.comm.overhead;
    report.comp_total += t.comp.overhead;
    report.time_total += t.comm.time_s + t.comp.time_s;
    report.energy_total += t.comm.energy_j + t.comp.energy_j;
    if (!t.comm.finite() || !t.comp.finite()) report.feasible = false;
    report.tasks.push_back(t);
  }
  report.total = report.comm_total + report.comp_total;
  return report;
}

}  // namespace d2d
