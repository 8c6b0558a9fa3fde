#include "d2d/mcob.hpp"

#include <algorithm>
#include <cmath>

#include "d2d/errors.hpp"

namespace d2d {

namespace {

// Regularisation floor for a singular (sigma + weight I).
constexpr double kEigenFloor = 1e-12;

CVector random_unit(int n, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  CVector v(n);
  for (int m = 0; m < n; ++m) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    v(m) = cplx(re, im);
  }
  const double norm = v.norm();
  return norm > 0.0 ? CVector(v / norm) : CVector(CVector::Unit(n, 0));
}

// Per-stream quantities for one iterate.
struct StreamState {
  double e = 1.0;
  double u = 0.0;
  double g = 0.0;
  Multipliers mult;
};

class McobRunner {
 public:
  McobRunner(const AllocationState& alloc, const ChannelSet& channels, const NetworkScenario& scenario,
             const McobOptions& options)
      : alloc_(alloc),
        channels_(channels),
        scenario_(scenario),
        options_(options),
        streams_(active_streams(alloc)),
        scale_(scenario.params.bandwidth_hz / kLn2) {}

  McobResult run(const BeamformingState& init) {
    McobResult result;
    result.beams = init;
    ConvergenceTrace& trace = result.trace;
    if (streams_.empty()) {
      trace.terminated_by = Termination::kEmpty;
      return result;
    }
    BeamformingState& beams = result.beams;

    std::vector<StreamState> state = evaluate(beams, trace);
    double objective = overhead_sum(state);
    trace.objective.push_back(objective);
    trace.system_error.push_back(0.0);
    trace.multiplier_gap.push_back(1.0);  // reference start value; no multipliers yet

    trace.terminated_by = Termination::kMaxIterations;
    for (int j = 1; j <= options_.max_iters; ++j) {
      const BeamformingState previous = beams;
      std::vector<CVector> target = solve_beamformers(beams, state, trace);

      // Full step, halved while the summed overhead would increase. If no
      // step helps the previous point is kept.
      double step = 1.0;
      std::vector<StreamState> next;
      double next_objective = objective;
      bool accepted = false;
      for (int attempt = 0; attempt < 40; ++attempt) {
        for (const Stream& s : streams_) {
          const auto k = static_cast<size_t>(s.tx);
          beams.f[k] = step == 1.0 ? target[k] : CVector(previous.f[k] + step * (target[k] - previous.f[k]));
        }
        next = evaluate(beams, trace, /*count_degenerate=*/false);
        next_objective = overhead_sum(next);
        if (next_objective <= objective) {
          accepted = true;
          break;
        }
        if (attempt == 0) ++trace.damped_steps;
        step *= 0.5;
      }
      if (!accepted) {
        beams = previous;
        next = evaluate(beams, trace, false);
        next_objective = objective;
      }

      double gap = 0.0;
      double zeta = 0.0;
      for (size_t n = 0; n < streams_.size(); ++n) {
        const StreamState& old_s = state[n];
        const StreamState& new_s = next[n];
        gap += old_s.mult.lambda * (new_s.g - old_s.mult.gamma * new_s.u);
        const double dl = new_s.mult.lambda - old_s.mult.lambda;
        const double dg = new_s.mult.gamma - old_s.mult.gamma;
        zeta += dl * dl + dg * dg;
      }
      store_multipliers(beams, next);

      // Stopping test on the fixed-multiplier objective, as in the reference
      // algorithm; the summed overhead is only traced.
      const double change = std::abs(gap - trace.multiplier_gap.back());
      objective = next_objective;
      state = std::move(next);
      trace.objective.push_back(objective);
      trace.system_error.push_back(zeta);
      trace.multiplier_gap.push_back(gap);
      trace.iterations = j;
      if (change <= options_.tolerance && zeta <= options_.tolerance) {
        trace.terminated_by = Termination::kTolerance;
        break;
      }
    }
    trace.degenerate_streams = 0;
    for (const auto& s : state) trace.degenerate_streams += s.mult.degenerate ? 1 : 0;
    return result;
  }

 private:
  double beta_of(int k) const {
    return options_.time_only ? 0.0 : scenario_.nodes[static_cast<size_t>(k)].overhead_factor;
  }

  // Recomputes MMSE combiners, w = e and the multipliers for the current f.
  std::vector<StreamState> evaluate(BeamformingState& beams, ConvergenceTrace& trace, bool count_degenerate = true) {
    refresh_combiners(alloc_, beams, channels_, scenario_.params.noise_power_w);
    std::vector<StreamState> out(streams_.size());
    for (size_t n = 0; n < streams_.size(); ++n) {
      const Stream& s = streams_[n];
      const auto k = static_cast<size_t>(s.tx);
      StreamState& st = out[n];
      st.e = beams.w[k];
      st.u = surrogate_u(st.e, st.e, scenario_.params.bandwidth_hz);
      const double power = beams.f[k].squaredNorm();
      st.g = overhead_weight(power, beta_of(s.tx), scenario_.params.circuit_power_w);
      st.mult = update_multipliers(st.u, power, beta_of(s.tx), scenario_.params.circuit_power_w,
                                   scenario_.nodes[k].task_bits);
      if (st.mult.degenerate) st.u = kMinSurrogateRate;
      if (count_degenerate && st.mult.degenerate) ++trace.degenerate_streams;
    }
    store_multipliers(beams, out);
    return out;
  }

  void store_multipliers(BeamformingState& beams, const std::vector<StreamState>& st) const {
    for (size_t n = 0; n < streams_.size(); ++n) {
      const auto k = static_cast<size_t>(streams_[n].tx);
      beams.lambda[k] = st[n].mult.lambda;
      beams.gamma[k] = st[n].mult.gamma;
    }
  }

  double overhead_sum(const std::vector<StreamState>& st) const {
    double total = 0.0;
    for (size_t n = 0; n < streams_.size(); ++n)
      total += scenario_.nodes[static_cast<size_t>(streams_[n].tx)].task_bits * st[n].g / st[n].u;
    return total;
  }

  // New f for every stream with (z, w, lambda, gamma) held fixed.
  std::vector<CVector> solve_beamformers(const BeamformingState& beams, const std::vector<StreamState>& st,
                                         ConvergenceTrace& trace) const {
    std::vector<CVector> out = beams.f;
    for (size_t n = 0; n < streams_.size(); ++n) {
      const Stream& s = streams_[n];
      const auto k = static_cast<size_t>(s.tx);
      BeamformerSubproblem sub;
      sub.stream = s;
      sub.power_cap = scenario_.nodes[k].power_budget_w;
      sub.weight = st[n].mult.lambda * beta_of(s.tx);
      sub.linear = st[n].mult.lambda * st[n].mult.gamma * scale_ / beams.w[k];
      const int N = channels_.antennas();
      sub.sigma = CMatrix::Zero(N, N);
      // Every stream sharing this subchannel sees f_k as signal or interference.
      for (size_t m = 0; m < streams_.size(); ++m) {
        const Stream& o = streams_[m];
        if (o.sub != s.sub) continue;
        const auto l = static_cast<size_t>(o.tx);
        const double coeff = st[m].mult.lambda * st[m].mult.gamma * scale_ / beams.w[l];
        const CVector v = channels_(s.tx, o.rx, s.sub).adjoint() * beams.combiner(o.rx, o.sub);
        sub.sigma.noalias() += coeff * (v * v.adjoint());
      }
      const CVector hz = channels_(s.tx, s.rx, s.sub).adjoint() * beams.combiner(s.rx, s.sub);
      const BeamformerSolution sol = solve_beamformer_qcqp(sub, hz);
      if (sol.regularized) ++trace.regularized_solves;
      out[k] = sol.f;
    }
    return out;
  }

  const AllocationState& alloc_;
  const ChannelSet& channels_;
  const NetworkScenario& scenario_;
  McobOptions options_;
  std::vector<Stream> streams_;
  double scale_;
};

}  // namespace

std::vector<Stream> active_streams(const AllocationState& alloc) {
  std::vector<Stream> out;
  for (int k = 0; k < alloc.nodes(); ++k)
    if (!alloc.is_local(k)) out.push_back({k, alloc.destination(k), alloc.subchannel(k)});
  return out;
}

CMatrix receive_covariance(int rx, int sub, const AllocationState& alloc, const BeamformingState& beams,
                           const ChannelSet& channels, double noise_power_w) {
  const int N = channels.antennas();
  CMatrix J = noise_power_w * CMatrix::Identity(N, N);
  for (int l = 0; l < alloc.nodes(); ++l) {
    if (alloc.subchannel(l) != sub) continue;
    const CVector s = channels(l, rx, sub) * beams.f[static_cast<size_t>(l)];
    J.noalias() += s * s.adjoint();
  }
  return J;
}

CVector mmse_combiner(int k, const AllocationState& alloc, const BeamformingState& beams,
                      const ChannelSet& channels, double noise_power_w) {
  if (!(noise_power_w > 0.0)) throw InvalidParameter("MMSE combiner needs positive noise power");
  if (alloc.is_local(k)) throw InvalidState("MMSE combiner requested for a local task");
  const int rx = alloc.destination(k);
  const int sub = alloc.subchannel(k);
  const CMatrix J = receive_covariance(rx, sub, alloc, beams, channels, noise_power_w);
  const CVector s = channels(k, rx, sub) * beams.f[static_cast<size_t>(k)];
  return J.llt().solve(s);
}

double mse(int k, const AllocationState& alloc, const BeamformingState& beams, const ChannelSet& channels,
           double noise_power_w) {
  const int rx = alloc.destination(k);
  const int sub = alloc.subchannel(k);
  const CVector& z = beams.combiner(rx, sub);
  const cplx desired = z.dot(channels(k, rx, sub) * beams.f[static_cast<size_t>(k)]);
  double e = std::norm(1.0 - desired) + noise_power_w * z.squaredNorm();
  for (int l = 0; l < alloc.nodes(); ++l) {
    if (l == k || alloc.subchannel(l) != sub) continue;
    e += std::norm(z.dot(channels(l, rx, sub) * beams.f[static_cast<size_t>(l)]));
  }
  return e;
}

double surrogate_u(double e_mse, double w, double bandwidth_hz) {
  if (!(e_mse > 0.0) || !(w > 0.0)) throw InvalidParameter("surrogate needs positive MSE and auxiliary");
  return bandwidth_hz / kLn2 * (-e_mse / w - std::log(w) + 1.0);
}

double overhead_weight(double tx_power_w, double beta, double circuit_power_w) {
  return 1.0 - beta + beta * tx_power_w + beta * circuit_power_w;
}

Multipliers update_multipliers(double u, double tx_power_w, double beta, double circuit_power_w, double task_bits) {
  Multipliers m;
  if (!(u > kMinSurrogateRate)) {
    m.degenerate = true;
    u = kMinSurrogateRate;
  }
  m.lambda = task_bits / u;
  m.gamma = overhead_weight(tx_power_w, beta, circuit_power_w) / u;
  return m;
}

double BeamformerSpectrum::power(double nu) const {
  double total = 0.0;
  for (Eigen::Index m = 0; m < values.size(); ++m) {
    const double d = values(m) + nu;
    total += std::norm(phi(m)) / (d * d);
  }
  return linear * linear * total;
}

CVector BeamformerSpectrum::beamformer(double nu) const {
  CVector coeffs(phi.size());
  for (Eigen::Index m = 0; m < phi.size(); ++m) coeffs(m) = phi(m) / (values(m) + nu);
  return linear * (basis * coeffs);
}

BeamformerSpectrum decompose(const BeamformerSubproblem& sub, const CVector& hz) {
  const auto N = sub.sigma.rows();
  const CMatrix A = sub.sigma + sub.weight * CMatrix::Identity(N, N);
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(A);
  BeamformerSpectrum sp;
  sp.values = eig.eigenvalues();
  sp.basis = eig.eigenvectors();
  sp.phi = sp.basis.adjoint() * hz;
  sp.linear = sub.linear;
  const double floor = std::max(sub.weight, kEigenFloor);
  for (Eigen::Index m = 0; m < N; ++m) {
    if (sp.values(m) < floor) {
      if (sp.values(m) < kEigenFloor && sub.weight < kEigenFloor && std::norm(sp.phi(m)) > 0.0) sp.regularized = true;
      sp.values(m) = floor;
    }
  }
  return sp;
}

BeamformerSolution solve_beamformer_qcqp(const BeamformerSubproblem& sub, const CVector& hz) {
  const BeamformerSpectrum sp = decompose(sub, hz);
  BeamformerSolution sol;
  sol.regularized = sp.regularized;
  const double cap = sub.power_cap;
  if (sp.power(0.0) <= cap) {
    sol.f = sp.beamformer(0.0);
    return sol;
  }
  // ||f(nu)||^2 <= linear^2 ||phi||^2 / nu^2, so this hi is feasible.
  double lo = 0.0;
  double hi = std::abs(sp.linear) * sp.phi.norm() / std::sqrt(cap);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double p = sp.power(mid);
    if (p > cap)
      lo = mid;
    else
      hi = mid;
    if (std::abs(p - cap) <= 1e-13 * cap && p <= cap) {
      hi = mid;
      break;
    }
  }
  sol.multiplier = hi;
  sol.f = sp.beamformer(hi);
  return sol;
}

double beamformer_objective(const BeamformerSubproblem& sub, const CVector& hz, const CVector& f) {
  return sub.weight * f.squaredNorm() - 2.0 * sub.linear * hz.dot(f).real() + f.dot(sub.sigma * f).real();
}

McobResult mcob(const AllocationState& alloc, const ChannelSet& channels, const NetworkScenario& scenario,
                const BeamformingState& init, const McobOptions& options) {
  if (!(options.tolerance > 0.0)) throw InvalidParameter("MCOB tolerance must be positive");
  if (options.max_iters < 0) throw InvalidParameter("MCOB iteration cap must be non-negative");
  return McobRunner(alloc, channels, scenario, options).run(init);
}

BeamformingState random_beams(const NetworkScenario& scenario, Rng& rng) {
  const int K = scenario.node_count();
  const int S = scenario.subchannel_count();
  const int N = scenario.antenna_count();
  BeamformingState beams = BeamformingState::zeros(K, S, N);
  for (int k = 0; k < K; ++k)
    beams.f[static_cast<size_t>(k)] =
        std::sqrt(scenario.nodes[static_cast<size_t>(k)].power_budget_w) * random_unit(N, rng);
  for (auto& z : beams.z) z = random_unit(N, rng);
  return beams;
}

void refresh_combiners(const AllocationState& alloc, BeamformingState& beams, const ChannelSet& channels,
                       double noise_power_w) {
  if (!(noise_power_w > 0.0)) throw InvalidParameter("MMSE combiner needs positive noise power");
  const int K = alloc.nodes();
  const int S = alloc.subchannels();
  const int N = channels.antennas();
  std::vector<char> active(static_cast<size_t>(K * S), 0);
  for (int k = 0; k < K; ++k) {
    if (alloc.is_local(k)) continue;
    const int rx = alloc.destination(k);
    const int sub = alloc.subchannel(k);
    active[static_cast<size_t>(rx * S + sub)] = 1;
    const CMatrix J = receive_covariance(rx, sub, alloc, beams, channels, noise_power_w);
    const CVector s = channels(k, rx, sub) * beams.f[static_cast<size_t>(k)];
    const CVector z = J.llt().solve(s);
    beams.combiner(rx, sub) = z;
    // With the MMSE combiner, e = 1 - s^H J^{-1} s; clamp guards round-off.
    const double e = 1.0 - s.dot(z).real();
    beams.w[static_cast<size_t>(k)] = std::clamp(e, 1e-300, 1.0);
  }
  for (int rx = 0; rx < K; ++rx)
    for (int sub = 0; sub < S; ++sub)
      if (!active[static_cast<size_t>(rx * S + sub)]) beams.combiner(rx, sub) = CVector::Zero(N);
}

}  // namespace d2d
