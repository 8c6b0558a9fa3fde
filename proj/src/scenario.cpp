#include "d2d/scenario.hpp"

#include <cmath>
#include <string>

#include "d2d/errors.hpp"
#include "d2d/rng.hpp"

namespace d2d {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidParameter(what);
}

bool positive_interval(const Interval& iv) { return iv.lo > 0.0 && iv.hi >= iv.lo; }

double draw_uniform(Rng& rng, const Interval& iv) {
  if (iv.hi == iv.lo) return iv.lo;
  return std::uniform_real_distribution<double>(iv.lo, iv.hi)(rng);
}

double draw_cpu(Rng& rng, const std::vector<CpuComponent>& mixture) {
  std::vector<double> weights;
  weights.reserve(mixture.size());
  for (const auto& c : mixture) weights.push_back(c.weight);
  std::discrete_distribution<size_t> pick(weights.begin(), weights.end());
  return draw_uniform(rng, mixture[pick(rng)].hz);
}

}  // namespace

void ScenarioParams::validate() const {
  require(nodes >= 1, "node count must be >= 1");
  require(subchannels >= 1, "subchannel count must be >= 1");
  require(antennas >= 1, "antenna count must be >= 1");
  require(power_budget_w > 0.0, "power budget must be positive");
  require(noise_power_w > 0.0, "noise power must be positive");
  require(circuit_power_w > 0.0, "circuit power must be positive");
  require(bandwidth_hz > 0.0, "bandwidth must be positive");
  require(ref_distance_m > 0.0, "reference distance must be positive");
  require(positive_interval(distance_m), "distance range must be positive and ordered");
  require(positive_interval(task_bits), "task size range must be positive and ordered");
  require(cycles_per_bit > 0.0, "processing density must be positive");
  require(energy_coefficient > 0.0, "energy coefficient must be positive");
  require(!cpu_mixture.empty(), "cpu mixture must have at least one component");
  double total_weight = 0.0;
  for (const auto& c : cpu_mixture) {
    require(c.weight >= 0.0, "cpu mixture weights must be non-negative");
    require(positive_interval(c.hz), "cpu mixture ranges must be positive and ordered");
    total_weight += c.weight;
  }
  require(total_weight > 0.0, "cpu mixture weights must not all be zero");
  require(overhead_factor >= 0.0 && overhead_factor <= 1.0, "overhead factor must lie in [0, 1]");
  if (!overhead_factors.empty()) {
    require(static_cast<int>(overhead_factors.size()) == nodes,
            "per-node overhead factors must have one entry per node");
    for (double b : overhead_factors) require(b >= 0.0 && b <= 1.0, "overhead factor must lie in [0, 1]");
  }
  if (!power_budgets_w.empty()) {
    require(static_cast<int>(power_budgets_w.size()) == nodes,
            "per-node power budgets must have one entry per node");
    for (double p : power_budgets_w) require(p > 0.0, "power budget must be positive");
  }
}

ChannelSet::ChannelSet(int nodes, int subchannels, int antennas)
    : nodes_(nodes), subchannels_(subchannels), antennas_(antennas) {
  h_.assign(static_cast<size_t>(nodes) * static_cast<size_t>(nodes) * static_cast<size_t>(subchannels),
            CMatrix::Zero(antennas, antennas));
}

bool ChannelSet::all_finite() const {
  for (const auto& m : h_)
    if (!m.allFinite()) return false;
  return true;
}

bool operator==(const ChannelSet& a, const ChannelSet& b) {
  if (a.nodes_ != b.nodes_ || a.subchannels_ != b.subchannels_ || a.antennas_ != b.antennas_) return false;
  for (size_t n = 0; n < a.h_.size(); ++n)
    if (a.h_[n] != b.h_[n]) return false;
  return true;
}

bool operator==(const NetworkScenario& a, const NetworkScenario& b) {
  return a.params == b.params && a.seed == b.seed && a.distances_m == b.distances_m && a.nodes == b.nodes &&
         a.channels == b.channels;
}

double pathloss_db(double distance_m, double ref_db, double exponent, double ref_distance_m) {
  if (!(distance_m > 0.0) || !(ref_distance_m > 0.0))
    throw InvalidParameter("path loss needs positive distance and reference distance");
  return ref_db - 10.0 * exponent * std::log10(distance_m / ref_distance_m);
}

ChannelSet draw_channels(const ScenarioParams& params, const Eigen::MatrixXd& distances_m, std::uint64_t seed) {
  const int K = params.nodes;
  const int S = params.subchannels;
  const int N = params.antennas;
  ChannelSet channels(K, S, N);
  Rng rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int tx = 0; tx < K; ++tx) {
    for (int rx = 0; rx < K; ++rx) {
      if (tx == rx) continue;  // no self link
      const double variance = db_to_linear(
          pathloss_db(distances_m(tx, rx), params.pathloss_ref_db, params.pathloss_exponent, params.ref_distance_m));
      const double scale = std::sqrt(variance / 2.0);
      for (int i = 0; i < S; ++i) {
        CMatrix& h = channels(tx, rx, i);
        for (int c = 0; c < N; ++c)
          for (int r = 0; r < N; ++r) {
            const double re = gauss(rng);
            const double im = gauss(rng);
            h(r, c) = cplx(scale * re, scale * im);
          }
      }
    }
  }
  return channels;
}

NetworkScenario generate_scenario(const ScenarioParams& params, std::uint64_t seed) {
  params.validate();
  const int K = params.nodes;
  NetworkScenario sc;
  sc.params = params;
  sc.seed = seed;

  Rng rng = make_rng(seed, SeedStream::kScenario, 0);
  sc.distances_m = Eigen::MatrixXd::Zero(K, K);
  for (int a = 0; a < K; ++a)
    for (int b = a + 1; b < K; ++b) {
      const double d = draw_uniform(rng, params.distance_m);
      sc.distances_m(a, b) = d;
      sc.distances_m(b, a) = d;
    }

  sc.nodes.resize(static_cast<size_t>(K));
  for (int k = 0; k < K; ++k) {
    NodeProfile& n = sc.nodes[static_cast<size_t>(k)];
    n.task_bits = draw_uniform(rng, params.task_bits);
    n.cpu_hz = draw_cpu(rng, params.cpu_mixture);
    n.cycles_per_bit = params.cycles_per_bit;
    n.energy_coefficient = params.energy_coefficient;
    n.overhead_factor = params.overhead_factor_of(k);
    n.power_budget_w = params.power_budget_of(k);
  }

  sc.channels = draw_channels(params, sc.distances_m, derive_seed(seed, SeedStream::kScenario, 1));
  return sc;
}

ChannelSet distort_csi(const ChannelSet& channels, double theta2, std::uint64_t seed) {
  if (!(theta2 >= 0.0)) throw InvalidParameter("CSI distortion ratio must be non-negative");
  ChannelSet out = channels;
  if (theta2 == 0.0) return out;
  Rng rng = make_rng(seed, SeedStream::kCsi, 0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int tx = 0; tx < channels.nodes(); ++tx)
    for (int rx = 0; rx < channels.nodes(); ++rx)
      for (int i = 0; i < channels.subchannels(); ++i) {
        CMatrix& h = out(tx, rx, i);
        const double entries = static_cast<double>(h.rows() * h.cols());
        const double variance = theta2 * channels(tx, rx, i).squaredNorm() / entries;
        const double scale = std::sqrt(variance / 2.0);
        for (Eigen::Index c = 0; c < h.cols(); ++c)
          for (Eigen::Index r = 0; r < h.rows(); ++r) {
            const double re = gauss(rng);
            const double im = gauss(rng);
            h(r, c) += cplx(scale * re, scale * im);
          }
      }
  return out;
}

NetworkScenario with_channels(const NetworkScenario& scenario, ChannelSet channels) {
  NetworkScenario out = scenario;
  out.channels = std::move(channels);
  return out;
}

}  // namespace d2d
