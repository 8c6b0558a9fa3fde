#pragma once

#include <vector>

#include "d2d/linalg.hpp"

namespace d2d {

inline constexpr int kNoSubchannel = -1;

// Task assignment a[k][k'], subchannel allocation b[k][i] and CPU allocation
// F[k][k'].
//
// Stored compactly as one destination per task, one subchannel per offloading
// transmitter and the CPU share granted to the task at its destination. This
// makes "exactly one destination" and "one subchannel iff offloaded" hold by
// construction; receiver exclusivity and CPU capacity are checked by
// validate().
class AllocationState {
 public:
  AllocationState() = default;
  // All tasks local, no CPU allocated yet.
  AllocationState(int nodes, int subchannels);

  // Builds from binary matrices (K x K, K x S) and CPU matrix (K x K).
  // Throws InvalidState when the row-sum constraints are violated.
  static AllocationState from_matrices(const Eigen::MatrixXi& a, const Eigen::MatrixXi& b,
                                       const Eigen::MatrixXd& F);

  int nodes() const { return static_cast<int>(destination_.size()); }
  int subchannels() const { return subchannels_; }

  int destination(int k) const { return destination_[idx(k)]; }
  int subchannel(int k) const { return subchannel_[idx(k)]; }
  bool is_local(int k) const { return destination_[idx(k)] == k; }
  double cpu(int k) const { return cpu_hz_[idx(k)]; }

  void assign_local(int k);
  void assign_offload(int k, int receiver, int sub);
  void set_cpu(int k, double hz) { cpu_hz_[idx(k)] = hz; }

  int a(int k, int kp) const { return destination(k) == kp ? 1 : 0; }
  int b(int k, int i) const { return subchannel(k) == i ? 1 : 0; }
  double F(int k, int kp) const { return destination(k) == kp ? cpu(k) : 0.0; }

  Eigen::MatrixXi a_matrix() const;
  Eigen::MatrixXi b_matrix() const;
  Eigen::MatrixXd F_matrix() const;

  // Tasks processed at node `kp`, ascending.
  std::vector<int> tasks_at(int kp) const;
  // Offloading transmitters, ascending.
  std::vector<int> transmitters() const;
  std::vector<int> transmitters_on(int sub) const;
  int offload_count() const;

  // At most one transmitter per (receiver, subchannel).
  bool receivers_exclusive() const;

  // Full validation against per-node CPU capacities: receiver exclusivity,
  // non-negative CPU, per-node capacity (relative slack `rel_tol`).
  void validate(const std::vector<double>& capacities_hz, double rel_tol = 1e-8) const;

  friend bool operator==(const AllocationState&, const AllocationState&) = default;

 private:
  size_t idx(int k) const { return static_cast<size_t>(k); }

  int subchannels_ = 0;
  std::vector<int> destination_;
  std::vector<int> subchannel_;
  std::vector<double> cpu_hz_;
};

// Transmit beamformers f[k], receive combiners z[k'][i] and the fractional
// programming auxiliaries (w, lambda, gamma) per transmitter.
struct BeamformingState {
  int subchannels = 0;
  std::vector<CVector> f;  // one per node
  std::vector<CVector> z;  // index rx * S + sub
  std::vector<double> w;
  std::vector<double> lambda;
  std::vector<double> gamma;

  static BeamformingState zeros(int nodes, int subchannels, int antennas);

  int nodes() const { return static_cast<int>(f.size()); }
  CVector& combiner(int rx, int sub) { return z[static_cast<size_t>(rx * subchannels + sub)]; }
  const CVector& combiner(int rx, int sub) const { return z[static_cast<size_t>(rx * subchannels + sub)]; }
};

}  // namespace d2d
