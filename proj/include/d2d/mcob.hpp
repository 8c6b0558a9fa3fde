#pragma once

#include <vector>

#include "d2d/rng.hpp"
#include "d2d/scenario.hpp"
#include "d2d/state.hpp"

namespace d2d {

// One active data stream (tx offloads to rx on subchannel sub).
struct Stream {
  int tx = 0;
  int rx = 0;
  int sub = 0;
};

std::vector<Stream> active_streams(const AllocationState& alloc);

// Receive covariance at `rx` on `sub`: sum over all transmitters on `sub` of
// H f f^H H^H, plus noise_power * I.
CMatrix receive_covariance(int rx, int sub, const AllocationState& alloc, const BeamformingState& beams,
                           const ChannelSet& channels, double noise_power_w);

// MMSE receiver J^{-1} H f for transmitter k. Throws InvalidParameter when
// the noise power is not positive.
CVector mmse_combiner(int k, const AllocationState& alloc, const BeamformingState& beams,
                      const ChannelSet& channels, double noise_power_w);

// Mean square error of stream k for the combiner stored in `beams`.
double mse(int k, const AllocationState& alloc, const BeamformingState& beams, const ChannelSet& channels,
           double noise_power_w);

// Rate surrogate (W / ln 2) (-e / w - ln w + 1). Maximised over w at w = e,
// where it equals -W log2(e).
double surrogate_u(double e_mse, double w, double bandwidth_hz);

// g(f) = 1 - beta + beta ||f||^2 + beta P_c.
double overhead_weight(double tx_power_w, double beta, double circuit_power_w);

struct Multipliers {
  double lambda = 0.0;
  double gamma = 0.0;
  bool degenerate = false;  // u <= 0, clamped
};

inline constexpr double kMinSurrogateRate = 1e-12;

// lambda = I / u, gamma = g / u.
Multipliers update_multipliers(double u, double tx_power_w, double beta, double circuit_power_w, double task_bits);

// Per-transmitter beamformer problem
//   minimise  weight ||f||^2 - 2 linear Re[(H^H z)^H f] + f^H sigma f
//   s.t.      ||f||^2 <= power_cap
// where weight = lambda beta and linear = lambda gamma / w (rate-scaled).
struct BeamformerSubproblem {
  Stream stream;
  double weight = 0.0;
  double linear = 0.0;
  CMatrix sigma;
  double power_cap = 0.0;
};

// Eigen-coordinates of the subproblem: sigma + weight I = Psi diag(values) Psi^H,
// phi = Psi^H (H^H z).
struct BeamformerSpectrum {
  Eigen::VectorXd values;
  CMatrix basis;
  CVector phi;
  double linear = 0.0;
  bool regularized = false;

  // ||f(nu)||^2 = linear^2 sum_m |phi_m|^2 / (values_m + nu)^2.
  double power(double nu) const;
  CVector beamformer(double nu) const;
};

BeamformerSpectrum decompose(const BeamformerSubproblem& sub, const CVector& hz);

struct BeamformerSolution {
  CVector f;
  double multiplier = 0.0;  // power dual
  bool regularized = false;
};

// Closed-form KKT solution with bisection on the power dual.
BeamformerSolution solve_beamformer_qcqp(const BeamformerSubproblem& sub, const CVector& hz);

double beamformer_objective(const BeamformerSubproblem& sub, const CVector& hz, const CVector& f);

enum class Termination { kTolerance, kMaxIterations, kEmpty };

// Per-iteration record of the beamforming loop. objective[j] is the summed
// communication overhead sum_k I_k g_k / u_k at iterate j (entry 0 is the
// initial point); system_error[j] is sum_k (dlambda^2 + dgamma^2).
// multiplier_gap[j] is the fixed-multiplier surrogate sum_k lambda (g - gamma u)
// evaluated with the multipliers in force during iteration j.
struct ConvergenceTrace {
  std::vector<double> objective;
  std::vector<double> system_error;
  std::vector<double> multiplier_gap;
  int iterations = 0;
  Termination terminated_by = Termination::kEmpty;
  int degenerate_streams = 0;
  int regularized_solves = 0;
  int damped_steps = 0;
};

struct McobOptions {
  int max_iters = 200;
  double tolerance = 1e-4;
  // Drop the energy term from the surrogate (beta treated as 0): pure
  // transmission-time minimisation.
  bool time_only = false;
};

struct McobResult {
  BeamformingState beams;
  ConvergenceTrace trace;
};

// Alternating beamformer / combiner / auxiliary updates with multiplier
// refresh. `init` supplies f for every node; active transmitters should start
// at full power.
McobResult mcob(const AllocationState& alloc, const ChannelSet& channels, const NetworkScenario& scenario,
                const BeamformingState& init, const McobOptions& options = {});

// Beamformers uniform on the complex sphere of radius sqrt(P_k); unit-norm
// random combiners.
BeamformingState random_beams(const NetworkScenario& scenario, Rng& rng);

// Replace every active stream's combiner by the MMSE receiver and w by its
// MSE; inactive combiners are zeroed.
void refresh_combiners(const AllocationState& alloc, BeamformingState& beams, const ChannelSet& channels,
                       double noise_power_w);

}  // namespace d2d
