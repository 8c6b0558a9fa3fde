#pragma once

#include <compare>
#include <limits>
#include <vector>

#include "d2d/cpu_alloc.hpp"
#include "d2d/scenario.hpp"
#include "d2d/state.hpp"

namespace d2d {

// Offloading candidate: task of `tx` goes to `rx` over subchannel `sub`.
struct Candidate {
  int tx = 0;
  int rx = 0;
  int sub = 0;
  friend auto operator<=>(const Candidate&, const Candidate&) = default;
};

inline constexpr double kRejected = -std::numeric_limits<double>::infinity();

// Partial assignment built up by the greedy allocator.
//
// Nodes still in the transmit pool have not been decided and are accounted as
// local. A committed stream removes both its transmitter and its receiver from
// the pool; the receiver's own task becomes local. Beamformers are held fixed;
// combiners are implicitly MMSE.
class GreedyState {
 public:
  GreedyState(const NetworkScenario& scenario, const ChannelSet& channels, const BeamformingState& beams,
              CpuPolicy policy = CpuPolicy::kOptimal);

  int nodes() const { return alloc_.nodes(); }
  int subchannels() const { return alloc_.subchannels(); }
  bool in_pool(int k) const { return pool_[static_cast<size_t>(k)] != 0; }
  int pool_size() const;
  // A node may receive unless its own task is offloaded.
  bool can_receive(int k) const { return alloc_.is_local(k); }
  bool receiver_busy(int rx, int sub) const;

  // Committed streams plus all undecided tasks treated as local; CPU shares
  // not yet materialised.
  const AllocationState& committed() const { return alloc_; }

  // Current network overhead (uncommitted tasks local, MMSE combiners).
  double comm_total() const;
  double comp_total() const;
  double total() const { return comm_total() + comp_total(); }

  // Y^loc - Y^off for the candidate; kRejected when the offloaded variant is
  // infeasible (zero rate or CPU floor violated).
  double benefit(const Candidate& c) const;

  void commit(const Candidate& c);

  // Remaining pool members go local; CPU shares are solved at every node.
  AllocationState finalize() const;

 private:
  double comp_at(int rx, const std::vector<int>& tasks) const;
  // Summed communication overhead of every stream on `sub` with `extra`
  // added; +inf if any stream has zero rate.
  double comm_with(int sub, const Candidate& extra) const;
  // Same for the committed streams alone.
  double comm_committed(int sub) const;
  CVector signal(int tx, int rx, int sub) const;
  // Rebuilds the inverse covariances used by comm_with after `sub` changes.
  void refresh_inverses(int sub);

  // A committed stream with its interference-plus-noise inverse, so an extra
  // interferer enters as a rank-one update.
  struct StreamInverse {
    int tx = 0;
    int rx = 0;
    CMatrix j_inv;
    CVector filter;  // j_inv * own signal
    double gain = 0.0;
  };

  const NetworkScenario& scenario_;
  const ChannelSet& channels_;
  const BeamformingState& beams_;
  CpuPolicy policy_;
  AllocationState alloc_;
  std::vector<char> pool_;
  std::vector<double> comp_cache_;  // per node, for the tasks currently there
  std::vector<double> comm_cache_;  // per subchannel
  std::vector<CMatrix> covariance_;  // noise + committed streams, index sub * K + rx
  std::vector<CMatrix> covariance_inv_;  // same indexing
  std::vector<std::vector<StreamInverse>> streams_;  // per subchannel
  // Receiver CPU overhead with task tx added, index tx * K + rx; NaN = not yet solved.
  mutable std::vector<double> comp_memo_;
};

std::vector<Candidate> feasible_candidates(const GreedyState& state);

double offloading_benefit(const GreedyState& state, const Candidate& c);

struct GreedyStep {
  Candidate chosen;
  double benefit = 0.0;
  double comm_total = 0.0;
  double comp_total = 0.0;
  double total = 0.0;
};

struct GreedyOptions {
  CpuPolicy cpu_policy = CpuPolicy::kOptimal;
  bool record_steps = false;
};

struct GreedyResult {
  AllocationState alloc;
  long long evaluations = 0;  // benefit evaluations over the whole run
  std::vector<GreedyStep> steps;
};

// Upper bound (K-1) K (K+1) S / 2 on benefit evaluations.
long long greedy_evaluation_bound(int nodes, int subchannels);

GreedyResult greedy_allocate(const NetworkScenario& scenario, const ChannelSet& channels,
                             const BeamformingState& beams, const GreedyOptions& options = {});

}  // namespace d2d
