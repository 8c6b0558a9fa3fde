#include "d2d/topology.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "d2d/errors.hpp"
#include "d2d/overhead.hpp"

namespace d2d {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

GreedyState::GreedyState(const NetworkScenario& scenario, const ChannelSet& channels, const BeamformingState& beams,
                         CpuPolicy policy)
    : scenario_(scenario),
      channels_(channels),
      beams_(beams),
      policy_(policy),
      alloc_(scenario.node_count(), scenario.subchannel_count()) {
  const int K = nodes();
  const int S = subchannels();
  const int N = channels.antennas();
  if (channels.nodes() != K || channels.subchannels() != S)
    throw InvalidParameter("channel set does not match the scenario dimensions");
  if (beams.nodes() != K) throw InvalidParameter("beamforming state does not match the scenario");
  pool_.assign(static_cast<size_t>(K), 1);
  comp_cache_.resize(static_cast<size_t>(K));
  for (int k = 0; k < K; ++k) comp_cache_[static_cast<size_t>(k)] = comp_at(k, {k});
  comm_cache_.assign(static_cast<size_t>(S), 0.0);
  covariance_.assign(static_cast<size_t>(K * S),
                     scenario.params.noise_power_w * CMatrix::Identity(N, N));
  covariance_inv_.assign(static_cast<size_t>(K * S),
                         CMatrix::Identity(N, N) / scenario.params.noise_power_w);
  streams_.resize(static_cast<size_t>(S));
  comp_memo_.assign(static_cast<size_t>(K * K), std::numeric_limits<double>::quiet_NaN());
}

int GreedyState::pool_size() const { return static_cast<int>(std::count(pool_.begin(), pool_.end(), 1)); }

bool GreedyState::receiver_busy(int rx, int sub) const {
  for (int l : alloc_.transmitters_on(sub))
    if (alloc_.destination(l) == rx) return true;
  return false;
}

double GreedyState::comm_total() const {
  double total = 0.0;
  for (double c : comm_cache_) total += c;
  return total;
}

double GreedyState::comp_total() const {
  double total = 0.0;
  for (double c : comp_cache_) total += c;
  return total;
}

double GreedyState::comp_at(int rx, const std::vector<int>& tasks) const {
  if (tasks.empty()) return 0.0;
  try {
    return solve_cpu(make_cpu_subproblem(scenario_, rx, tasks), policy_).objective;
  } catch (const Infeasible&) {
    return kInf;
  }
}

CVector GreedyState::signal(int tx, int rx, int sub) const {
  return channels_(tx, rx, sub) * beams_.f[static_cast<size_t>(tx)];
}

void GreedyState::refresh_inverses(int sub) {
  const int K = nodes();
  const int N = channels_.antennas();
  const CMatrix eye = CMatrix::Identity(N, N);
  for (int rx = 0; rx < K; ++rx) {
    const auto i = static_cast<size_t>(sub * K + rx);
    covariance_inv_[i] = covariance_[i].llt().solve(eye);
  }
  auto& list = streams_[static_cast<size_t>(sub)];
  list.clear();
  for (int l : alloc_.transmitters_on(sub)) {
    StreamInverse s;
    s.tx = l;
    s.rx = alloc_.destination(l);
    const CVector own = signal(s.tx, s.rx, sub);
    CMatrix J = covariance_[static_cast<size_t>(sub * K + s.rx)];
    J.noalias() -= own * own.adjoint();
    s.j_inv = J.llt().solve(eye);
    s.filter = s.j_inv * own;
    s.gain = own.dot(s.filter).real();
    list.push_back(std::move(s));
  }
}

double GreedyState::comm_with(int sub, const Candidate& extra) const {
  const double bandwidth = scenario_.params.bandwidth_hz;
  const auto overhead_at = [&](int tx, double gain) {
    const double r = bandwidth * std::log1p(std::max(gain, 0.0)) / kLn2;
    return comm_overhead_from_rate(tx, r, beams_.f[static_cast<size_t>(tx)].squaredNorm(), scenario_);
  };
  // Committed streams see one more interferer (Sherman-Morrison); the extra
  // stream sees noise plus everything committed.
  const int K = nodes();
  double total = 0.0;
  for (const StreamInverse& s : streams_[static_cast<size_t>(sub)]) {
    const CVector e = signal(extra.tx, s.rx, sub);
    const double denom = 1.0 + e.dot(s.j_inv * e).real();
    const OverheadTerm t = overhead_at(s.tx, s.gain - std::norm(e.dot(s.filter)) / denom);
    if (!t.finite()) return kInf;
    total += t.overhead;
  }
  const CVector own = signal(extra.tx, extra.rx, sub);
  const CMatrix& inv = covariance_inv_[static_cast<size_t>(sub * K + extra.rx)];
  const OverheadTerm t = overhead_at(extra.tx, own.dot(inv * own).real());
  if (!t.finite()) return kInf;
  return total + t.overhead;
}

double GreedyState::comm_committed(int sub) const {
  const int K = nodes();
  double total = 0.0;
  for (int l : alloc_.transmitters_on(sub)) {
    const int rx = alloc_.destination(l);
    // The cache holds noise plus every committed stream, including this one.
    CMatrix J = covariance_[static_cast<size_t>(sub * K + rx)];
    const CVector own = signal(l, rx, sub);
    J.noalias() -= own * own.adjoint();
    const double gain = own.dot(J.llt().solve(own)).real();
    const double r = scenario_.params.bandwidth_hz * std::log1p(std::max(gain, 0.0)) / kLn2;
    const OverheadTerm t = comm_overhead_from_rate(l, r, beams_.f[static_cast<size_t>(l)].squaredNorm(), scenario_);
    if (!t.finite()) return kInf;
    total += t.overhead;
  }
  return total;
}

double GreedyState::benefit(const Candidate& c) const {
  const double before = comp_cache_[static_cast<size_t>(c.tx)] + comp_cache_[static_cast<size_t>(c.rx)] +
                        comm_cache_[static_cast<size_t>(c.sub)];
  double& comp_after = comp_memo_[static_cast<size_t>(c.tx * nodes() + c.rx)];
  if (std::isnan(comp_after)) {
    std::vector<int> at_rx = alloc_.tasks_at(c.rx);
    at_rx.insert(std::lower_bound(at_rx.begin(), at_rx.end(), c.tx), c.tx);
    comp_after = comp_at(c.rx, at_rx);
  }
  if (!std::isfinite(comp_after)) return kRejected;
  const double comm_after = comm_with(c.sub, c);
  if (!std::isfinite(comm_after)) return kRejected;
  return before - (comp_after + comm_after);
}

void GreedyState::commit(const Candidate& c) {
  if (!in_pool(c.tx) || !can_receive(c.rx) || c.tx == c.rx || receiver_busy(c.rx, c.sub))
    throw InvalidState("greedy commit of an infeasible candidate");
  const int K = nodes();
  alloc_.assign_offload(c.tx, c.rx, c.sub);
  pool_[static_cast<size_t>(c.tx)] = 0;
  pool_[static_cast<size_t>(c.rx)] = 0;
  for (int rx = 0; rx < K; ++rx) {
    const CVector s = signal(c.tx, rx, c.sub);
    covariance_[static_cast<size_t>(c.sub * K + rx)].noalias() += s * s.adjoint();
  }
  comp_cache_[static_cast<size_t>(c.tx)] = 0.0;
  comp_cache_[static_cast<size_t>(c.rx)] = comp_at(c.rx, alloc_.tasks_at(c.rx));
  comm_cache_[static_cast<size_t>(c.sub)] = comm_committed(c.sub);
  for (int tx = 0; tx < K; ++tx) {
    comp_memo_[static_cast<size_t>(tx * K + c.rx)] = std::numeric_limits<double>::quiet_NaN();
    comp_memo_[static_cast<size_t>(tx * K + c.tx)] = std::numeric_limits<double>::quiet_NaN();
  }
  refresh_inverses(c.sub);
}

AllocationState GreedyState::finalize() const {
  AllocationState out = alloc_;
  allocate_cpu(out, scenario_, policy_);
  return out;
}

std::vector<Candidate> feasible_candidates(const GreedyState& state) {
  std::vector<Candidate> out;
  for (int k = 0; k < state.nodes(); ++k) {
    if (!state.in_pool(k)) continue;
    for (int kp = 0; kp < state.nodes(); ++kp) {
      if (kp == k || !state.can_receive(kp)) continue;
      for (int i = 0; i < state.subchannels(); ++i)
        if (!state.receiver_busy(kp, i)) out.push_back({k, kp, i});
    }
  }
  return out;
}

double offloading_benefit(const GreedyState& state, const Candidate& c) { return state.benefit(c); }

long long greedy_evaluation_bound(int nodes, int subchannels) {
  const long long K = nodes;
  return (K - 1) * K * (K + 1) * subchannels / 2;
}

GreedyResult greedy_allocate(const NetworkScenario& scenario, const ChannelSet& channels,
                             const BeamformingState& beams, const GreedyOptions& options) {
  GreedyState state(scenario, channels, beams, options.cpu_policy);
  GreedyResult result;
  for (;;) {
    const std::vector<Candidate> candidates = feasible_candidates(state);
    if (candidates.empty()) break;
    // Candidates come out in lexicographic order, so strict > keeps the
    // lowest tuple among equal benefits.
    double best = kRejected;
    Candidate chosen;
    for (const Candidate& c : candidates) {
      const double eta = state.benefit(c);
      ++result.evaluations;
      if (eta > best) {
        best = eta;
        chosen = c;
      }
    }
    if (!(best > 0.0)) break;
    state.commit(chosen);
    if (options.record_steps)
      result.steps.push_back({chosen, best, state.comm_total(), state.comp_total(), state.total()});
  }
  result.alloc = state.finalize();
  return result;
}

}  // namespace d2d
