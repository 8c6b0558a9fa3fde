#pragma once

// Shared fixtures for the unit suites: hand-built scenarios and random
// complex draws that do not go through the library's own generators.

#include <complex>
#include <random>

#include "d2d/scenario.hpp"
#include "d2d/state.hpp"

namespace testing {

using d2d::CMatrix;
using d2d::CVector;
using d2d::cplx;

// Scenario with unit noise, unit bandwidth, unit power budget, no circuit
// power and all-zero channels. Every node has a 1 Mbit task and a 1 GHz CPU.
inline d2d::NetworkScenario hand_scenario(int nodes, int subchannels, int antennas, double beta = 0.5) {
  d2d::NetworkScenario sc;
  sc.params.nodes = nodes;
  sc.params.subchannels = subchannels;
  sc.params.antennas = antennas;
  sc.params.noise_power_w = 1.0;
  sc.params.bandwidth_hz = 1.0;
  sc.params.power_budget_w = 1.0;
  sc.params.circuit_power_w = 0.0;
  sc.params.overhead_factor = beta;
  sc.distances_m = Eigen::MatrixXd::Constant(nodes, nodes, 10.0);
  sc.distances_m.diagonal().setZero();
  for (int k = 0; k < nodes; ++k) {
    d2d::NodeProfile p;
    p.task_bits = 1e6;
    p.cpu_hz = 1e9;
    p.cycles_per_bit = 200.0;
    p.energy_coefficient = 3.5e-27;
    p.overhead_factor = beta;
    p.power_budget_w = 1.0;
    sc.nodes.push_back(p);
  }
  sc.channels = d2d::ChannelSet(nodes, subchannels, antennas);
  return sc;
}

inline cplx gaussian(std::mt19937_64& rng, double variance = 1.0) {
  std::normal_distribution<double> n(0.0, std::sqrt(variance / 2.0));
  return {n(rng), n(rng)};
}

inline CMatrix random_matrix(int rows, int cols, std::mt19937_64& rng, double variance = 1.0) {
  CMatrix m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = gaussian(rng, variance);
  return m;
}

inline CVector random_vector(int n, std::mt19937_64& rng, double variance = 1.0) {
  return random_matrix(n, 1, rng, variance).col(0);
}

inline CVector random_unit(int n, std::mt19937_64& rng) {
  CVector v = random_vector(n, rng);
  return v / v.norm();
}

// Fill every cross channel of `sc` with i.i.d. CN(0, variance) entries.
inline void randomize_channels(d2d::NetworkScenario& sc, std::mt19937_64& rng, double variance = 1.0) {
  const int K = sc.node_count(), S = sc.subchannel_count(), N = sc.antenna_count();
  for (int tx = 0; tx < K; ++tx)
    for (int rx = 0; rx < K; ++rx)
      for (int s = 0; s < S; ++s)
        sc.channels(tx, rx, s) = tx == rx ? CMatrix::Zero(N, N) : random_matrix(N, N, rng, variance);
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

}  // namespace testing
