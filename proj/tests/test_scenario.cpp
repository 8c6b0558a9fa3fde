#include "doctest.h"

#include <cmath>

#include "d2d/errors.hpp"
#include "d2d/scenario.hpp"
#include "support.hpp"

using namespace d2d;

TEST_CASE("path loss at the reference distance equals the reference gain") {
  CHECK(pathloss_db(1.0, -30.0, 3.5, 1.0) == doctest::Approx(-30.0));
}

TEST_CASE("path loss at 10 m and 30 m") {
  CHECK(pathloss_db(10.0, -30.0, 3.5, 1.0) == doctest::Approx(-30.0 - 35.0).epsilon(1e-12));
  CHECK(pathloss_db(30.0, -30.0, 3.5, 1.0) == doctest::Approx(-30.0 - 35.0 * std::log10(30.0)).epsilon(1e-12));
  CHECK(std::abs(pathloss_db(30.0, -30.0, 3.5, 1.0) + 81.69) < 0.01);
}

TEST_CASE("path loss rejects non-positive distances") {
  CHECK_THROWS_AS(pathloss_db(0.0, -30.0, 3.5, 1.0), InvalidParameter);
  CHECK_THROWS_AS(pathloss_db(-1.0, -30.0, 3.5, 1.0), InvalidParameter);
  CHECK_THROWS_AS(pathloss_db(10.0, -30.0, 3.5, 0.0), InvalidParameter);
}

TEST_CASE("path loss strictly decreases with distance") {
  double prev = pathloss_db(1.0, -30.0, 3.5, 1.0);
  for (double d = 1.5; d < 100.0; d *= 1.5) {
    const double cur = pathloss_db(d, -30.0, 3.5, 1.0);
    CHECK(cur < prev);
    prev = cur;
  }
}

TEST_CASE("parameter validation") {
  ScenarioParams p;
  CHECK_NOTHROW(p.validate());
  auto broken = [](auto edit) {
    ScenarioParams q;
    edit(q);
    return q;
  };
  CHECK_THROWS_AS(broken([](ScenarioParams& q) { q.nodes = 0; }).validate(), InvalidParameter);
  CHECK_THROWS_AS(broken([](ScenarioParams& q) { q.subchannels = 0; }).validate(), InvalidParameter);
  CHECK_THROWS_AS(broken([](ScenarioParams& q) { q.antennas = 0; }).validate(), InvalidParameter);
  CHECK_THROWS_AS(broken([](ScenarioParams& q) { q.noise_power_w = 0.0; }).validate(), InvalidParameter);
  CHECK_THROWS_AS(broken([](ScenarioParams& q) { q.bandwidth_hz = -1.0; }).validate(), InvalidParameter);
  CHECK_THROWS_AS(broken([](ScenarioParams& q) { q.overhead_factor = 1.5; }).validate(), InvalidParameter);
  CHECK_THROWS_AS(broken([](ScenarioParams& q) { q.distance_m = {0.0, 10.0}; }).validate(), InvalidParameter);
  CHECK_THROWS_AS(generate_scenario(broken([](ScenarioParams& q) { q.nodes = -3; }), 1), InvalidParameter);
}

TEST_CASE("scenario generation is deterministic in (params, seed)") {
  ScenarioParams p;
  p.nodes = 6;
  const NetworkScenario a = generate_scenario(p, 42);
  const NetworkScenario b = generate_scenario(p, 42);
  CHECK(a == b);
  CHECK(a.channels == b.channels);
  const NetworkScenario c = generate_scenario(p, 43);
  CHECK_FALSE(a.channels == c.channels);
}

TEST_CASE("generated quantities stay within their configured supports") {
  ScenarioParams p;
  p.nodes = 12;
  const NetworkScenario sc = generate_scenario(p, 7);
  REQUIRE(sc.node_count() == 12);
  for (int a = 0; a < 12; ++a) {
    CHECK(sc.distances_m(a, a) == 0.0);
    for (int b = 0; b < 12; ++b) {
      if (a == b) continue;
      CHECK(sc.distances_m(a, b) == sc.distances_m(b, a));
      CHECK(p.distance_m.contains(sc.distances_m(a, b)));
    }
    const NodeProfile& n = sc.nodes[static_cast<size_t>(a)];
    CHECK(p.task_bits.contains(n.task_bits));
    CHECK((p.cpu_mixture[0].hz.contains(n.cpu_hz) || p.cpu_mixture[1].hz.contains(n.cpu_hz)));
    CHECK(n.overhead_factor == 0.5);
  }
  CHECK(sc.channels.all_finite());
}

TEST_CASE("channel entry power matches the path-loss variance per link") {
  ScenarioParams p;
  p.nodes = 30;
  const NetworkScenario base = generate_scenario(p, 11);
  const int K = 30, S = p.subchannels, N = p.antennas;
  Eigen::MatrixXd power = Eigen::MatrixXd::Zero(K, K);
  const int draws = 200;  // 200 x S x N^2 = 10^4 entries per link
  for (int d = 0; d < draws; ++d) {
    const ChannelSet h = draw_channels(p, base.distances_m, static_cast<std::uint64_t>(1000 + d));
    for (int tx = 0; tx < K; ++tx)
      for (int rx = 0; rx < K; ++rx)
        if (tx != rx)
          for (int s = 0; s < S; ++s) power(tx, rx) += h(tx, rx, s).squaredNorm();
  }
  const double per_link = static_cast<double>(draws) * S * N * N;
  CHECK(per_link >= 1e4);
  int outside = 0;
  for (int tx = 0; tx < K; ++tx)
    for (int rx = 0; rx < K; ++rx) {
      if (tx == rx) continue;
      const double expected = std::pow(
          10.0, pathloss_db(base.distances_m(tx, rx), p.pathloss_ref_db, p.pathloss_exponent, p.ref_distance_m) / 10.0);
      if (std::abs(power(tx, rx) / per_link / expected - 1.0) > 0.10) ++outside;
    }
  CHECK(outside == 0);
}

TEST_CASE("CPU mixture puts a quarter of the mass on the fast component") {
  ScenarioParams p;
  p.nodes = 100;
  p.subchannels = 1;
  p.antennas = 1;
  int fast = 0, total = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const NetworkScenario sc = generate_scenario(p, seed);
    for (const auto& n : sc.nodes) {
      fast += n.cpu_hz >= 0.9e9 ? 1 : 0;
      ++total;
    }
  }
  CHECK(total == 10000);
  CHECK(std::abs(static_cast<double>(fast) / total - 0.25) <= 0.02);
}

TEST_CASE("zero CSI distortion returns the channels unchanged") {
  ScenarioParams p;
  p.nodes = 4;
  const NetworkScenario sc = generate_scenario(p, 3);
  CHECK(distort_csi(sc.channels, 0.0, 9) == sc.channels);
}

TEST_CASE("CSI distortion is deterministic and rejects negative ratios") {
  ScenarioParams p;
  p.nodes = 4;
  const NetworkScenario sc = generate_scenario(p, 3);
  CHECK(distort_csi(sc.channels, 0.3, 5) == distort_csi(sc.channels, 0.3, 5));
  CHECK_FALSE(distort_csi(sc.channels, 0.3, 5) == distort_csi(sc.channels, 0.3, 6));
  CHECK_THROWS_AS(distort_csi(sc.channels, -0.1, 5), InvalidParameter);
}

TEST_CASE("CSI distortion variance scales with the average entry energy") {
  ScenarioParams p;
  p.nodes = 10;
  p.antennas = 5;
  const NetworkScenario sc = generate_scenario(p, 21);
  const double theta2 = 0.5;
  double normalized = 0.0;
  long entries = 0;
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const ChannelSet d = distort_csi(sc.channels, theta2, seed);
    for (int tx = 0; tx < p.nodes; ++tx)
      for (int rx = 0; rx < p.nodes; ++rx) {
        if (tx == rx) continue;
        for (int s = 0; s < p.subchannels; ++s) {
          const CMatrix& h = sc.channels(tx, rx, s);
          const double var = theta2 * h.squaredNorm() / 25.0;
          normalized += (d(tx, rx, s) - h).squaredNorm() / var;
          entries += 25;
        }
      }
  }
  CHECK(entries >= 10000);
  CHECK(std::abs(normalized / static_cast<double>(entries) - 1.0) <= 0.10);
}

TEST_CASE("replacing channels keeps the rest of the scenario") {
  ScenarioParams p;
  p.nodes = 3;
  const NetworkScenario sc = generate_scenario(p, 1);
  const NetworkScenario moved = with_channels(sc, distort_csi(sc.channels, 0.2, 1));
  CHECK(moved.nodes == sc.nodes);
  CHECK(moved.params == sc.params);
  CHECK_FALSE(moved.channels == sc.channels);
}
