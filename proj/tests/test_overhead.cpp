#include "doctest.h"

#include <cmath>
#include <random>

#include "d2d/cpu_alloc.hpp"
#include "d2d/errors.hpp"
#include "d2d/mcob.hpp"
#include "d2d/overhead.hpp"
#include "d2d/solvers.hpp"
#include "support.hpp"

using namespace d2d;
using testing::hand_scenario;

namespace {

CMatrix scalar(cplx v) { return CMatrix::Constant(1, 1, v); }
CVector scalar_vec(cplx v) { return CVector::Constant(1, v); }

// Two-node, single-antenna link 0 -> 1 with gain h, unit beamformer and combiner.
struct ScalarLink {
  NetworkScenario sc = hand_scenario(2, 1, 1);
  AllocationState alloc{2, 1};
  BeamformingState beams = BeamformingState::zeros(2, 1, 1);
  explicit ScalarLink(cplx h) {
    sc.channels(0, 1, 0) = scalar(h);
    alloc.assign_offload(0, 1, 0);
    beams.f[0] = scalar_vec(1.0);
    beams.combiner(1, 0) = scalar_vec(1.0);
  }
};

}  // namespace

TEST_CASE("SINR of a single scalar link") {
  ScalarLink link(2.0);
  CHECK(sinr(0, 1, 0, link.alloc, link.beams, link.sc.channels, 1.0) == doctest::Approx(4.0));
  link.beams.f[0] = scalar_vec(0.0);
  CHECK(sinr(0, 1, 0, link.alloc, link.beams, link.sc.channels, 1.0) == 0.0);
}

TEST_CASE("SINR with one co-channel interferer") {
  NetworkScenario sc = hand_scenario(4, 1, 1);
  AllocationState alloc(4, 1);
  alloc.assign_offload(0, 1, 0);
  alloc.assign_offload(2, 3, 0);
  sc.channels(0, 1, 0) = scalar(2.0);
  sc.channels(2, 1, 0) = scalar(1.0);
  BeamformingState beams = BeamformingState::zeros(4, 1, 1);
  beams.f[0] = scalar_vec(1.0);
  beams.f[2] = scalar_vec(1.0);
  beams.combiner(1, 0) = scalar_vec(1.0);
  CHECK(sinr(0, 1, 0, alloc, beams, sc.channels, 1.0) == doctest::Approx(2.0));
}

TEST_CASE("SINR rejects inactive streams and zero combiners") {
  ScalarLink link(2.0);
  CHECK_THROWS_AS(sinr(1, 0, 0, link.alloc, link.beams, link.sc.channels, 1.0), InvalidState);
  link.beams.combiner(1, 0) = scalar_vec(0.0);
  CHECK_THROWS_AS(sinr(0, 1, 0, link.alloc, link.beams, link.sc.channels, 1.0), InvalidState);
}

TEST_CASE("rate is W log2(1 + SINR)") {
  ScalarLink unit(1.0);
  CHECK(rate(0, unit.alloc, unit.beams, unit.sc.channels, unit.sc) == doctest::Approx(1.0));

  ScalarLink wide(std::sqrt(3.0));
  wide.sc.params.bandwidth_hz = 1e6;
  CHECK(rate(0, wide.alloc, wide.beams, wide.sc.channels, wide.sc) == doctest::Approx(2e6).epsilon(1e-12));

  ScalarLink dead(0.0);
  CHECK(rate(0, dead.alloc, dead.beams, dead.sc.channels, dead.sc) == 0.0);
}

TEST_CASE("rate with the MMSE combiner equals -W log2 of the MSE") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    NetworkScenario sc = hand_scenario(4, 1, 2);
    sc.params.bandwidth_hz = 1e6;
    testing::randomize_channels(sc, rng);
    AllocationState alloc(4, 1);
    alloc.assign_offload(0, 1, 0);
    alloc.assign_offload(2, 3, 0);
    BeamformingState beams = BeamformingState::zeros(4, 1, 2);
    beams.f[0] = testing::random_vector(2, rng);
    beams.f[2] = testing::random_vector(2, rng);

    // Independent MMSE receiver and its error.
    const CVector s = sc.channels(0, 1, 0) * beams.f[0];
    const CVector q = sc.channels(2, 1, 0) * beams.f[2];
    const CMatrix J = s * s.adjoint() + q * q.adjoint() + CMatrix::Identity(2, 2);
    const CVector z = J.ldlt().solve(s);
    const double e = 1.0 - s.dot(z).real();
    beams.combiner(1, 0) = z;
    const double r = rate(0, alloc, beams, sc.channels, sc);
    CHECK(testing::rel_diff(r, -1e6 * std::log2(e)) <= 1e-9);
  }
}

TEST_CASE("computation overhead") {
  NetworkScenario sc = hand_scenario(1, 1, 1);
  const OverheadTerm t = comp_overhead(0, 0, 2e8, sc);
  CHECK(t.time_s == doctest::Approx(1.0));
  CHECK(t.energy_j == doctest::Approx(0.028));
  CHECK(t.overhead == doctest::Approx(0.514));

  sc.nodes[0].overhead_factor = 0.0;
  CHECK(comp_overhead(0, 0, 2e8, sc).overhead == doctest::Approx(200.0 * 1e6 / 2e8));
  sc.nodes[0].overhead_factor = 1.0;
  CHECK(comp_overhead(0, 0, 2e8, sc).overhead == doctest::Approx(3.5e-27 * 4e16 * 2e8));

  const OverheadTerm stalled = comp_overhead(0, 0, 0.0, sc);
  CHECK(std::isinf(stalled.time_s));
  CHECK_FALSE(stalled.finite());
}

TEST_CASE("communication overhead from a rate") {
  NetworkScenario sc = hand_scenario(2, 1, 1);
  sc.params.circuit_power_w = 0.01;
  const OverheadTerm t = comm_overhead_from_rate(0, 1e6, 2.0, sc);
  CHECK(t.time_s == doctest::Approx(1.0));
  CHECK(t.energy_j == doctest::Approx(2.01));
  CHECK(t.overhead == doctest::Approx(1.505));

  sc.nodes[0].overhead_factor = 0.0;
  CHECK(comm_overhead_from_rate(0, 4e6, 2.0, sc).overhead == doctest::Approx(0.25));

  const OverheadTerm dead = comm_overhead_from_rate(0, 0.0, 2.0, sc);
  CHECK(std::isinf(dead.time_s));
  CHECK(std::isinf(dead.energy_j));
  CHECK(std::isinf(dead.overhead));
}

TEST_CASE("overheads are invariant to the combiner scale") {
  std::mt19937_64 rng(17);
  NetworkScenario sc = hand_scenario(4, 1, 3);
  testing::randomize_channels(sc, rng);
  AllocationState alloc(4, 1);
  alloc.assign_offload(0, 1, 0);
  alloc.assign_offload(2, 3, 0);
  allocate_cpu(alloc, sc, CpuPolicy::kOptimal);
  BeamformingState beams = BeamformingState::zeros(4, 1, 3);
  beams.f[0] = testing::random_vector(3, rng);
  beams.f[2] = testing::random_vector(3, rng);
  beams.combiner(1, 0) = testing::random_vector(3, rng);
  beams.combiner(3, 0) = testing::random_vector(3, rng);
  const OverheadReport before = total_overhead(alloc, beams, sc);
  for (cplx c : {cplx(3.0, 0.0), cplx(-0.2, 0.7), cplx(0.0, -1e-3)}) {
    BeamformingState scaled = beams;
    scaled.combiner(1, 0) *= c;
    scaled.combiner(3, 0) *= c;
    const OverheadReport after = total_overhead(alloc, scaled, sc);
    CHECK(testing::rel_diff(after.total, before.total) <= 1e-12);
    CHECK(testing::rel_diff(sinr(0, 1, 0, alloc, scaled, sc.channels, 1.0),
                            sinr(0, 1, 0, alloc, beams, sc.channels, 1.0)) <= 1e-12);
  }
}

TEST_CASE("SINR grows with beamformer norm and transmission time falls with it") {
  std::mt19937_64 rng(3);
  NetworkScenario sc = hand_scenario(4, 1, 2);
  testing::randomize_channels(sc, rng);
  AllocationState alloc(4, 1);
  alloc.assign_offload(0, 1, 0);
  alloc.assign_offload(2, 3, 0);
  BeamformingState beams = BeamformingState::zeros(4, 1, 2);
  const CVector dir = testing::random_unit(2, rng);
  beams.f[2] = testing::random_vector(2, rng);
  beams.combiner(1, 0) = testing::random_vector(2, rng);
  double prev_sinr = -1.0, prev_time = std::numeric_limits<double>::infinity();
  for (double scale = 0.1; scale <= 3.0; scale += 0.1) {
    beams.f[0] = scale * dir;
    const double s = sinr(0, 1, 0, alloc, beams, sc.channels, 1.0);
    const double t = comm_overhead(0, alloc, beams, sc.channels, sc).time_s;
    CHECK(s >= prev_sinr);
    CHECK(t <= prev_time);
    prev_sinr = s;
    prev_time = t;
  }
}

TEST_CASE("all-local report carries computation only") {
  ScenarioParams p;
  p.nodes = 6;
  const NetworkScenario sc = generate_scenario(p, 8);
  AllocationState alloc(6, p.subchannels);
  allocate_cpu(alloc, sc, CpuPolicy::kOptimal);
  const OverheadReport r = total_overhead(alloc, BeamformingState::zeros(6, p.subchannels, p.antennas), sc);
  CHECK(r.comm_total == 0.0);
  double expected = 0.0;
  for (int k = 0; k < 6; ++k) expected += comp_overhead(k, k, alloc.cpu(k), sc).overhead;
  CHECK(r.total == doctest::Approx(expected).epsilon(1e-14));
  CHECK(r.feasible);
}

TEST_CASE("single offload total is the hand sum of its three terms") {
  NetworkScenario sc = hand_scenario(2, 1, 1);
  sc.channels(0, 1, 0) = scalar(cplx(1.5, -0.5));
  sc.params.bandwidth_hz = 1e6;
  AllocationState alloc(2, 1);
  alloc.assign_offload(0, 1, 0);
  alloc.set_cpu(0, 4e8);
  alloc.set_cpu(1, 6e8);
  BeamformingState beams = BeamformingState::zeros(2, 1, 1);
  beams.f[0] = scalar_vec(cplx(0.6, 0.0));
  beams.combiner(1, 0) = scalar_vec(1.0);
  const OverheadReport r = total_overhead(alloc, beams, sc);

  const double snr = std::norm(cplx(1.5, -0.5) * 0.6) / 1.0;
  const double rate_bps = 1e6 * std::log2(1.0 + snr);
  const double t_comm = 1e6 / rate_bps;
  const double y_comm = 0.5 * t_comm + 0.5 * (0.36 + 0.0) * t_comm;
  const double c = 200.0 * 1e6;
  const double y_comp0 = 0.5 * c / 4e8 + 0.5 * 3.5e-27 * 16e16 * c;
  const double y_comp1 = 0.5 * c / 6e8 + 0.5 * 3.5e-27 * 36e16 * c;
  CHECK(r.comm_total == doctest::Approx(y_comm).epsilon(1e-12));
  CHECK(r.comp_total == doctest::Approx(y_comp0 + y_comp1).epsilon(1e-12));
  CHECK(r.total == doctest::Approx(y_comm + y_comp0 + y_comp1).epsilon(1e-12));
}

TEST_CASE("zero-rate stream marks the report infeasible") {
  NetworkScenario sc = hand_scenario(2, 1, 1);
  AllocationState alloc(2, 1);
  alloc.assign_offload(0, 1, 0);
  allocate_cpu(alloc, sc, CpuPolicy::kOptimal);
  BeamformingState beams = BeamformingState::zeros(2, 1, 1);
  beams.f[0] = scalar_vec(1.0);
  beams.combiner(1, 0) = scalar_vec(1.0);
  const OverheadReport r = total_overhead(alloc, beams, sc);
  CHECK_FALSE(r.feasible);
  CHECK(std::isinf(r.total));
}

TEST_CASE("report totals reconcile with per-task entries") {
  ScenarioParams p;
  p.nodes = 6;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const NetworkScenario sc = generate_scenario(p, seed);
    Rng rng = make_rng(seed, SeedStream::kSolver);
    AllocationState alloc = random_allocation(6, p.subchannels, rng);
    allocate_cpu(alloc, sc, CpuPolicy::kOptimal);
    BeamformingState beams = random_beams(sc, rng);
    refresh_combiners(alloc, beams, sc.channels, p.noise_power_w);
    const OverheadReport r = total_overhead(alloc, beams, sc);
    double comm = 0.0, comp = 0.0, time = 0.0, energy = 0.0;
    for (const auto& t : r.tasks) {
      const double beta = sc.nodes[static_cast<size_t>(t.task)].overhead_factor;
      CHECK(t.comm.overhead == (1.0 - beta) * t.comm.time_s + beta * t.comm.energy_j);
      CHECK(t.comp.overhead == (1.0 - beta) * t.comp.time_s + beta * t.comp.energy_j);
      comm += t.comm.overhead;
      comp += t.comp.overhead;
      time += t.comm.time_s + t.comp.time_s;
      energy += t.comm.energy_j + t.comp.energy_j;
    }
    CHECK(r.comm_total == doctest::Approx(comm).epsilon(1e-13));
    CHECK(r.comp_total == doctest::Approx(comp).epsilon(1e-13));
    CHECK(r.total == doctest::Approx(r.comm_total + r.comp_total).epsilon(1e-13));
    CHECK(r.time_total == doctest::Approx(time).epsilon(1e-13));
    CHECK(r.energy_total == doctest::Approx(energy).epsilon(1e-13));
  }
}
