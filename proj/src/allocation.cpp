#include <cmath>
#include <string>

#include "d2d/errors.hpp"
#include "d2d/state.hpp"

namespace d2d {

AllocationState::AllocationState(int nodes, int subchannels)
    : subchannels_(subchannels),
      destination_(static_cast<size_t>(nodes)),
      subchannel_(static_cast<size_t>(nodes), kNoSubchannel),
      cpu_hz_(static_cast<size_t>(nodes), 0.0) {
  for (int k = 0; k < nodes; ++k) destination_[idx(k)] = k;
}

AllocationState AllocationState::from_matrices(const Eigen::MatrixXi& a, const Eigen::MatrixXi& b,
                                               const Eigen::MatrixXd& F) {
  const int K = static_cast<int>(a.rows());
  const int S = static_cast<int>(b.cols());
  if (a.cols() != K || b.rows() != K || F.rows() != K || F.cols() != K)
    throw InvalidState("allocation matrices have inconsistent shapes");
  AllocationState out(K, S);
  for (int k = 0; k < K; ++k) {
    int dest = -1;
    int ones = 0;
    for (int kp = 0; kp < K; ++kp) {
      if (a(k, kp) != 0 && a(k, kp) != 1) throw InvalidState("task assignment must be binary");
      if (a(k, kp) == 1) {
        dest = kp;
        ++ones;
      }
    }
    if (ones != 1) throw InvalidState("task " + std::to_string(k) + " must have exactly one destination");
    int sub = kNoSubchannel;
    int subs = 0;
    for (int i = 0; i < S; ++i) {
      if (b(k, i) != 0 && b(k, i) != 1) throw InvalidState("subchannel allocation must be binary");
      if (b(k, i) == 1) {
        sub = i;
        ++subs;
      }
    }
    const bool local = dest == k;
    if (local && subs != 0) throw InvalidState("local task " + std::to_string(k) + " must not hold a subchannel");
    if (!local && subs != 1)
      throw InvalidState("offloaded task " + std::to_string(k) + " must hold exactly one subchannel");
    for (int kp = 0; kp < K; ++kp)
      if (kp != dest && F(k, kp) != 0.0)
        throw InvalidState("CPU allocated to task " + std::to_string(k) + " at a node it is not assigned to");
    if (local)
      out.assign_local(k);
    else
      out.assign_offload(k, dest, sub);
    out.set_cpu(k, F(k, dest));
  }
  if (!out.receivers_exclusive()) throw InvalidState("two transmitters share a receiver on one subchannel");
  return out;
}

void AllocationState::assign_local(int k) {
  destination_[idx(k)] = k;
  subchannel_[idx(k)] = kNoSubchannel;
}

void AllocationState::assign_offload(int k, int receiver, int sub) {
  if (receiver == k) throw InvalidState("offload destination must differ from the source");
  if (receiver < 0 || receiver >= nodes() || sub < 0 || sub >= subchannels_)
    throw InvalidState("offload target out of range");
  destination_[idx(k)] = receiver;
  subchannel_[idx(k)] = sub;
}

Eigen::MatrixXi AllocationState::a_matrix() const {
  Eigen::MatrixXi m = Eigen::MatrixXi::Zero(nodes(), nodes());
  for (int k = 0; k < nodes(); ++k) m(k, destination(k)) = 1;
  return m;
}

Eigen::MatrixXi AllocationState::b_matrix() const {
  Eigen::MatrixXi m = Eigen::MatrixXi::Zero(nodes(), subchannels_);
  for (int k = 0; k < nodes(); ++k)
    if (subchannel(k) != kNoSubchannel) m(k, subchannel(k)) = 1;
  return m;
}

Eigen::MatrixXd AllocationState::F_matrix() const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(nodes(), nodes());
  for (int k = 0; k < nodes(); ++k) m(k, destination(k)) = cpu(k);
  return m;
}

std::vector<int> AllocationState::tasks_at(int kp) const {
  std::vector<int> out;
  for (int k = 0; k < nodes(); ++k)
    if (destination(k) == kp) out.push_back(k);
  return out;
}

std::vector<int> AllocationState::transmitters() const {
  std::vector<int> out;
  for (int k = 0; k < nodes(); ++k)
    if (!is_local(k)) out.push_back(k);
  return out;
}

std::vector<int> AllocationState::transmitters_on(int sub) const {
  std::vector<int> out;
  for (int k = 0; k < nodes(); ++k)
    if (subchannel(k) == sub) out.push_back(k);
  return out;
}

int AllocationState::offload_count() const {
  int n = 0;
  for (int k = 0; k < nodes(); ++k) n += is_local(k) ? 0 : 1;
  return n;
}

bool AllocationState::receivers_exclusive() const {
  std::vector<int> seen(static_cast<size_t>(nodes() * subchannels_), 0);
  for (int k = 0; k < nodes(); ++k) {
    if (is_local(k)) continue;
    int& slot = seen[static_cast<size_t>(destination(k) * subchannels_ + subchannel(k))];
    if (++slot > 1) return false;
  }
  return true;
}

void AllocationState::validate(const std::vector<double>& capacities_hz, double rel_tol) const {
  if (static_cast<int>(capacities_hz.size()) != nodes()) throw InvalidState("capacity vector size mismatch");
  if (!receivers_exclusive()) throw InvalidState("two transmitters share a receiver on one subchannel");
  std::vector<double> used(static_cast<size_t>(nodes()), 0.0);
  for (int k = 0; k < nodes(); ++k) {
    if (!(cpu(k) >= 0.0) || !std::isfinite(cpu(k))) throw InvalidState("CPU allocation must be finite and >= 0");
    used[static_cast<size_t>(destination(k))] += cpu(k);
  }
  for (int kp = 0; kp < nodes(); ++kp) {
    const double cap = capacities_hz[static_cast<size_t>(kp)];
    if (used[static_cast<size_t>(kp)] > cap * (1.0 + rel_tol))
      throw InvalidState("CPU capacity exceeded at node " + std::to_string(kp));
  }
}

BeamformingState BeamformingState::zeros(int nodes, int subchannels, int antennas) {
  BeamformingState s;
  s.subchannels = subchannels;
  s.f.assign(static_cast<size_t>(nodes), CVector::Zero(antennas));
  s.z.assign(static_cast<size_t>(nodes * subchannels), CVector::Zero(antennas));
  s.w.assign(static_cast<size_t>(nodes), 1.0);
  s.lambda.assign(static_cast<size_t>(nodes), 0.0);
  s.gamma.assign(static_cast<size_t>(nodes), 0.0);
  return s;
}

}  // namespace d2d
