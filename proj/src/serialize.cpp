#include "d2d/serialize.hpp"

#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

#include "d2d/errors.hpp"

namespace d2d {

namespace {

Json interval_json(const Interval& iv) { return Json::array({iv.lo, iv.hi}); }

Interval interval_from(const Json& j, const char* key) {
  if (!j.is_array() || j.size() != 2) throw InvalidParameter(std::string(key) + " must be a [lo, hi] pair");
  return {j[0].get<double>(), j[1].get<double>()};
}

Json cplx_json(cplx c) { return Json::array({c.real(), c.imag()}); }

cplx cplx_from(const Json& j) {
  if (!j.is_array() || j.size() != 2) throw InvalidParameter("complex entries must be [re, im] pairs");
  return {j[0].get<double>(), j[1].get<double>()};
}

Json matrix_json(const CMatrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(cplx_json(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json term_json(const OverheadTerm& t) {
  return {{"time_s", t.time_s}, {"energy_j", t.energy_j}, {"overhead", t.overhead}};
}

// Reads `key` as a double, or its dBW spelling converted to watts.
void read_power(const Json& j, const char* watts_key, const char* dbw_key, double& out) {
  const bool has_w = j.contains(watts_key);
  const bool has_dbw = j.contains(dbw_key);
  if (has_w && has_dbw)
    throw InvalidParameter(std::string("give only one of ") + watts_key + " and " + dbw_key);
  if (has_w) out = j.at(watts_key).get<double>();
  if (has_dbw) out = dbw_to_watts(j.at(dbw_key).get<double>());
}

}  // namespace

std::string csv_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

Json params_to_json(const ScenarioParams& p) {
  Json mixture = Json::array();
  for (const auto& c : p.cpu_mixture) mixture.push_back({{"weight", c.weight}, {"hz", interval_json(c.hz)}});
  Json j = {
      {"nodes", p.nodes},
      {"subchannels", p.subchannels},
      {"antennas", p.antennas},
      {"power_budget_w", p.power_budget_w},
      {"noise_power_w", p.noise_power_w},
      {"circuit_power_w", p.circuit_power_w},
      {"bandwidth_hz", p.bandwidth_hz},
      {"pathloss_ref_db", p.pathloss_ref_db},
      {"pathloss_exponent", p.pathloss_exponent},
      {"ref_distance_m", p.ref_distance_m},
      {"distance_m", interval_json(p.distance_m)},
      {"task_bits", interval_json(p.task_bits)},
      {"cycles_per_bit", p.cycles_per_bit},
      {"energy_coefficient", p.energy_coefficient},
      {"cpu_mixture", mixture},
      {"overhead_factor", p.overhead_factor},
  };
  if (!p.overhead_factors.empty()) j["overhead_factors"] = p.overhead_factors;
  if (!p.power_budgets_w.empty()) j["power_budgets_w"] = p.power_budgets_w;
  return j;
}

ScenarioParams params_from_json(const Json& j) {
  if (!j.is_object()) throw InvalidParameter("scenario parameters must be a JSON object");
  static const std::set<std::string> known = {
      "nodes",           "subchannels",      "antennas",          "power_budget_w",  "power_budget_dbw",
      "noise_power_w",   "noise_power_dbw",  "circuit_power_w",   "circuit_power_dbw", "bandwidth_hz",
      "pathloss_ref_db", "pathloss_exponent", "ref_distance_m",   "distance_m",      "task_bits",
      "cycles_per_bit",  "energy_coefficient", "cpu_mixture",     "overhead_factor", "overhead_factors",
      "power_budgets_w"};
  for (const auto& [key, value] : j.items())
    if (!known.contains(key)) throw InvalidParameter("unknown scenario parameter '" + key + "'");

  ScenarioParams p;
  try {
    if (j.contains("nodes")) p.nodes = j.at("nodes").get<int>();
    if (j.contains("subchannels")) p.subchannels = j.at("subchannels").get<int>();
    if (j.contains("antennas")) p.antennas = j.at("antennas").get<int>();
    read_power(j, "power_budget_w", "power_budget_dbw", p.power_budget_w);
    read_power(j, "noise_power_w", "noise_power_dbw", p.noise_power_w);
    read_power(j, "circuit_power_w", "circuit_power_dbw", p.circuit_power_w);
    if (j.contains("bandwidth_hz")) p.bandwidth_hz = j.at("bandwidth_hz").get<double>();
    if (j.contains("pathloss_ref_db")) p.pathloss_ref_db = j.at("pathloss_ref_db").get<double>();
    if (j.contains("pathloss_exponent")) p.pathloss_exponent = j.at("pathloss_exponent").get<double>();
    if (j.contains("ref_distance_m")) p.ref_distance_m = j.at("ref_distance_m").get<double>();
    if (j.contains("distance_m")) p.distance_m = interval_from(j.at("distance_m"), "distance_m");
    if (j.contains("task_bits")) p.task_bits = interval_from(j.at("task_bits"), "task_bits");
    if (j.contains("cycles_per_bit")) p.cycles_per_bit = j.at("cycles_per_bit").get<double>();
    if (j.contains("energy_coefficient")) p.energy_coefficient = j.at("energy_coefficient").get<double>();
    if (j.contains("cpu_mixture")) {
      p.cpu_mixture.clear();
      for (const auto& c : j.at("cpu_mixture"))
        p.cpu_mixture.push_back({c.at("weight").get<double>(), interval_from(c.at("hz"), "cpu_mixture.hz")});
    }
    if (j.contains("overhead_factor")) p.overhead_factor = j.at("overhead_factor").get<double>();
    if (j.contains("overhead_factors")) p.overhead_factors = j.at("overhead_factors").get<std::vector<double>>();
    if (j.contains("power_budgets_w")) p.power_budgets_w = j.at("power_budgets_w").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidParameter(std::string("malformed scenario parameters: ") + e.what());
  }
  p.validate();
  return p;
}

Json complex_vector_to_json(const CVector& v) {
  Json out = Json::array();
  for (Eigen::Index m = 0; m < v.size(); ++m) out.push_back(cplx_json(v(m)));
  return out;
}

Json scenario_to_json(const NetworkScenario& sc, bool include_channels) {
  Json j = {{"params", params_to_json(sc.params)}, {"seed", sc.seed}};
  if (!include_channels) return j;
  Json dist = Json::array();
  for (Eigen::Index r = 0; r < sc.distances_m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < sc.distances_m.cols(); ++c) row.push_back(sc.distances_m(r, c));
    dist.push_back(std::move(row));
  }
  j["distances_m"] = std::move(dist);
  Json nodes = Json::array();
  for (const auto& n : sc.nodes)
    nodes.push_back({{"task_bits", n.task_bits},
                     {"cpu_hz", n.cpu_hz},
                     {"cycles_per_bit", n.cycles_per_bit},
                     {"energy_coefficient", n.energy_coefficient},
                     {"overhead_factor", n.overhead_factor},
                     {"power_budget_w", n.power_budget_w}});
  j["nodes"] = std::move(nodes);
  const ChannelSet& h = sc.channels;
  Json channels = Json::array();
  for (int tx = 0; tx < h.nodes(); ++tx) {
    Json per_tx = Json::array();
    for (int rx = 0; rx < h.nodes(); ++rx) {
      Json per_rx = Json::array();
      for (int i = 0; i < h.subchannels(); ++i) per_rx.push_back(matrix_json(h(tx, rx, i)));
      per_tx.push_back(std::move(per_rx));
    }
    channels.push_back(std::move(per_tx));
  }
  j["channels"] = std::move(channels);
  return j;
}

NetworkScenario scenario_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("params")) throw InvalidParameter("scenario document needs a params block");
  const ScenarioParams params = params_from_json(j.at("params"));
  const std::uint64_t seed = j.value("seed", std::uint64_t{0});
  if (!j.contains("channels")) return generate_scenario(params, seed);

  try {
    const int K = params.nodes;
    const int S = params.subchannels;
    const int N = params.antennas;
    NetworkScenario sc;
    sc.params = params;
    sc.seed = seed;
    const Json& dist = j.at("distances_m");
    if (dist.size() != static_cast<size_t>(K)) throw InvalidParameter("distances_m must be K x K");
    sc.distances_m = Eigen::MatrixXd::Zero(K, K);
    for (int r = 0; r < K; ++r) {
      if (dist[r].size() != static_cast<size_t>(K)) throw InvalidParameter("distances_m must be K x K");
      for (int c = 0; c < K; ++c) sc.distances_m(r, c) = dist[r][c].get<double>();
    }
    const Json& nodes = j.at("nodes");
    if (nodes.size() != static_cast<size_t>(K)) throw InvalidParameter("nodes must have K entries");
    for (const auto& n : nodes)
      sc.nodes.push_back({n.at("task_bits").get<double>(), n.at("cpu_hz").get<double>(),
                          n.at("cycles_per_bit").get<double>(), n.at("energy_coefficient").get<double>(),
                          n.at("overhead_factor").get<double>(), n.at("power_budget_w").get<double>()});
    sc.channels = ChannelSet(K, S, N);
    const Json& ch = j.at("channels");
    if (ch.size() != static_cast<size_t>(K)) throw InvalidParameter("channels must be indexed [tx][rx][sub]");
    for (int tx = 0; tx < K; ++tx)
      for (int rx = 0; rx < K; ++rx)
        for (int i = 0; i < S; ++i) {
          const Json& m = ch.at(tx).at(rx).at(i);
          if (m.size() != static_cast<size_t>(N)) throw InvalidParameter("channel matrices must be N x N");
          CMatrix& h = sc.channels(tx, rx, i);
          for (int r = 0; r < N; ++r) {
            if (m[r].size() != static_cast<size_t>(N)) throw InvalidParameter("channel matrices must be N x N");
            for (int c = 0; c < N; ++c) h(r, c) = cplx_from(m[r][c]);
          }
        }
    if (!sc.channels.all_finite()) throw InvalidParameter("channel entries must be finite");
    return sc;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidParameter(std::string("malformed scenario document: ") + e.what());
  }
}

std::string report_csv_header(int nodes) {
  std::string h = "scenario_id,solver,y_comm,y_comp,y_total,time_s,energy_j,feasible";
  for (int k = 0; k < nodes; ++k) h += ",y_comm_" + std::to_string(k) + ",y_comp_" + std::to_string(k);
  return h;
}

std::string report_csv_row(const std::string& scenario_id, const std::string& solver, const OverheadReport& r) {
  std::string row = scenario_id + "," + solver + "," + csv_number(r.comm_total) + "," + csv_number(r.comp_total) +
                    "," + csv_number(r.total) + "," + csv_number(r.time_total) + "," + csv_number(r.energy_total) +
                    "," + (r.feasible ? "1" : "0");
  for (const auto& t : r.tasks) row += "," + csv_number(t.comm.overhead) + "," + csv_number(t.comp.overhead);
  return row;
}

Json report_to_json(const OverheadReport& r) {
  Json tasks = Json::array();
  for (const auto& t : r.tasks)
    tasks.push_back({{"task", t.task},
                     {"destination", t.destination},
                     {"subchannel", t.subchannel},
                     {"rate_bps", t.rate_bps},
                     {"comm", term_json(t.comm)},
                     {"comp", term_json(t.comp)}});
  return {{"y_comm", r.comm_total}, {"y_comp", r.comp_total}, {"y_total", r.total}, {"time_s", r.time_total},
          {"energy_j", r.energy_total}, {"feasible", r.feasible}, {"tasks", tasks}};
}

Json solution_to_json(const Solution& s) {
  const int K = s.alloc.nodes();
  Json destination = Json::array();
  Json subchannel = Json::array();
  Json cpu = Json::array();
  for (int k = 0; k < K; ++k) {
    destination.push_back(s.alloc.destination(k));
    subchannel.push_back(s.alloc.subchannel(k));
    cpu.push_back(s.alloc.cpu(k));
  }
  Json beams = Json::array();
  for (int k = 0; k < s.beams.nodes(); ++k) beams.push_back(complex_vector_to_json(s.beams.f[static_cast<size_t>(k)]));
  Json combiners = Json::array();
  for (int k = 0; k < s.alloc.nodes(); ++k) {
    if (s.alloc.is_local(k)) continue;
    const int rx = s.alloc.destination(k);
    const int sub = s.alloc.subchannel(k);
    combiners.push_back({{"rx", rx}, {"sub", sub}, {"z", complex_vector_to_json(s.beams.combiner(rx, sub))}});
  }
  return {{"solver", s.solver},
          {"allocation", {{"destination", destination}, {"subchannel", subchannel}, {"cpu_hz", cpu}}},
          {"beamformers", beams},
          {"combiners", combiners},
          {"report", report_to_json(s.report)},
          {"outer_trace", s.outer_trace},
          {"restart", s.restart},
          {"outer_iterations", s.outer_iterations},
          {"mcob_iterations", s.mcob_iterations},
          {"greedy_evaluations", s.greedy_evaluations},
          {"wall_seconds", s.wall_seconds}};
}

std::string trace_csv(const ConvergenceTrace& t) {
  std::ostringstream out;
  out << "iteration,rho,zeta,multiplier_gap\n";
  for (size_t j = 0; j < t.objective.size(); ++j)
    out << j << ',' << csv_number(t.objective[j]) << ',' << csv_number(t.system_error[j]) << ','
        << csv_number(t.multiplier_gap[j]) << '\n';
  return out.str();
}

std::string greedy_steps_csv(const std::vector<GreedyStep>& steps) {
  std::ostringstream out;
  out << "step,tx,rx,sub,eta,y_comm,y_comp,y_total\n";
  for (size_t n = 0; n < steps.size(); ++n) {
    const auto& s = steps[n];
    out << n + 1 << ',' << s.chosen.tx << ',' << s.chosen.rx << ',' << s.chosen.sub << ',' << csv_number(s.benefit)
        << ',' << csv_number(s.comm_total) << ',' << csv_number(s.comp_total) << ',' << csv_number(s.total) << '\n';
  }
  return out.str();
}

Json error_json(const std::exception& e) {
  if (const auto* d = dynamic_cast<const Error*>(&e)) return {{"error", d->kind()}, {"message", d->what()}};
  return {{"error", "internal"}, {"message", e.what()}};
}

}  // namespace d2d
