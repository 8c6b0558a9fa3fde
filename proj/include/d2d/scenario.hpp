#pragma once

#include <cstdint>
#include <cmath>
#include <vector>

#include "d2d/linalg.hpp"

namespace d2d {

inline double dbw_to_watts(double dbw) { return std::pow(10.0, dbw / 10.0); }
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double x) const { return x >= lo && x <= hi; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

// One component of the CPU-frequency mixture: with probability `weight`
// draw uniformly from `hz`.
struct CpuComponent {
  double weight = 1.0;
  Interval hz;
  friend bool operator==(const CpuComponent&, const CpuComponent&) = default;
};

// Scenario generation parameters. Everything is linear scale (W, Hz, bits);
// dBW inputs are converted on ingestion.
struct ScenarioParams {
  int nodes = 10;
  int subchannels = 2;
  int antennas = 5;

  double power_budget_w = dbw_to_watts(3.0);
  double noise_power_w = dbw_to_watts(-90.0);
  double circuit_power_w = dbw_to_watts(-20.0);
  double bandwidth_hz = 1e6;

  double pathloss_ref_db = -30.0;
  double pathloss_exponent = 3.5;
  double ref_distance_m = 1.0;
  Interval distance_m{10.0, 30.0};

  Interval task_bits{1e6, 8e6};
  double cycles_per_bit = 200.0;
  double energy_coefficient = 3.5e-27;
  std::vector<CpuComponent> cpu_mixture{{0.75, {1e8, 2e8}}, {0.25, {9e8, 1e9}}};
  double overhead_factor = 0.5;

  // Optional per-node overrides; empty means "all nodes use the scalar".
  std::vector<double> overhead_factors;
  std::vector<double> power_budgets_w;

  // Throws InvalidParameter on violation.
  void validate() const;

  double overhead_factor_of(int k) const {
    return overhead_factors.empty() ? overhead_factor : overhead_factors[static_cast<size_t>(k)];
  }
  double power_budget_of(int k) const {
    return power_budgets_w.empty() ? power_budget_w : power_budgets_w[static_cast<size_t>(k)];
  }

  friend bool operator==(const ScenarioParams&, const ScenarioParams&) = default;
};

// Per-subchannel MIMO channels. operator()(tx, rx, sub) is the N x N matrix
// mapping the transmit beamformer of `tx` to the antennas of `rx`.
class ChannelSet {
 public:
  ChannelSet() = default;
  // All-zero channels.
  ChannelSet(int nodes, int subchannels, int antennas);

  int nodes() const { return nodes_; }
  int subchannels() const { return subchannels_; }
  int antennas() const { return antennas_; }

  const CMatrix& operator()(int tx, int rx, int sub) const { return h_[index(tx, rx, sub)]; }
  CMatrix& operator()(int tx, int rx, int sub) { return h_[index(tx, rx, sub)]; }

  bool all_finite() const;

  friend bool operator==(const ChannelSet& a, const ChannelSet& b);

 private:
  size_t index(int tx, int rx, int sub) const {
    return (static_cast<size_t>(tx) * static_cast<size_t>(nodes_) + static_cast<size_t>(rx)) *
               static_cast<size_t>(subchannels_) +
           static_cast<size_t>(sub);
  }

  int nodes_ = 0;
  int subchannels_ = 0;
  int antennas_ = 0;
  std::vector<CMatrix> h_;
};

// Materialized per-node quantities.
struct NodeProfile {
  double task_bits = 0.0;       // I_k
  double cpu_hz = 0.0;          // F_k
  double cycles_per_bit = 0.0;  // mu_k
  double energy_coefficient = 0.0;  // kappa_k
  double overhead_factor = 0.0;     // beta_k
  double power_budget_w = 0.0;      // P_k
  friend bool operator==(const NodeProfile&, const NodeProfile&) = default;
};

struct NetworkScenario {
  ScenarioParams params;
  std::uint64_t seed = 0;
  Eigen::MatrixXd distances_m;  // symmetric, zero diagonal
  std::vector<NodeProfile> nodes;
  ChannelSet channels;

  int node_count() const { return static_cast<int>(nodes.size()); }
  int subchannel_count() const { return params.subchannels; }
  int antenna_count() const { return params.antennas; }

  friend bool operator==(const NetworkScenario& a, const NetworkScenario& b);
};

// Large-scale fading in dB: beta0 - 10 alpha log10(d / d0).
double pathloss_db(double distance_m, double ref_db, double exponent, double ref_distance_m);

NetworkScenario generate_scenario(const ScenarioParams& params, std::uint64_t seed);

// Draws fresh channels for an existing node set (used when only the radio
// environment changes, e.g. per queue frame).
ChannelSet draw_channels(const ScenarioParams& params, const Eigen::MatrixXd& distances_m,
                         std::uint64_t seed);

// Additive Gaussian CSI error. Each entry of H gets CN(0, theta2 * ||H||_F^2 / (rows*cols)).
ChannelSet distort_csi(const ChannelSet& channels, double theta2, std::uint64_t seed);

// Copy of `scenario` with its channels replaced.
NetworkScenario with_channels(const NetworkScenario& scenario, ChannelSet channels);

}  // namespace d2d
