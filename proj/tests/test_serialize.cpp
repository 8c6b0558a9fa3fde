#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <limits>
#include <sstream>

#include "d2d/errors.hpp"
#include "d2d/serialize.hpp"
#include "d2d/solvers.hpp"

using namespace d2d;

namespace {

int count_fields(const std::string& line) { return static_cast<int>(std::count(line.begin(), line.end(), ',')) + 1; }

NetworkScenario small(std::uint64_t seed) {
  ScenarioParams p;
  p.nodes = 4;
  p.subchannels = 2;
  p.antennas = 3;
  return generate_scenario(p, seed);
}

}  // namespace

TEST_CASE("parameters round-trip through JSON") {
  ScenarioParams p;
  p.nodes = 7;
  p.overhead_factors = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7};
  CHECK(params_from_json(params_to_json(p)) == p);
  CHECK(params_from_json(Json::parse(params_to_json(p).dump())) == p);
}

TEST_CASE("decibel spellings are converted on ingestion") {
  const ScenarioParams p = params_from_json({{"power_budget_dbw", 3.0}, {"noise_power_dbw", -90.0}});
  CHECK(p.power_budget_w == doctest::Approx(std::pow(10.0, 0.3)));
  CHECK(p.noise_power_w == doctest::Approx(1e-9));
  CHECK_THROWS_AS(params_from_json({{"power_budget_dbw", 3.0}, {"power_budget_w", 2.0}}), InvalidParameter);
}

TEST_CASE("parameter documents are checked") {
  CHECK_THROWS_AS(params_from_json({{"nodez", 3}}), InvalidParameter);
  CHECK_THROWS_AS(params_from_json({{"nodes", "three"}}), InvalidParameter);
  CHECK_THROWS_AS(params_from_json({{"nodes", 0}}), InvalidParameter);
  CHECK_THROWS_AS(params_from_json({{"overhead_factor", 2.0}}), InvalidParameter);
  CHECK(params_from_json(Json::object()) == ScenarioParams{});
}

TEST_CASE("scenario round-trip is lossless with channels") {
  const NetworkScenario sc = small(5);
  const NetworkScenario back = scenario_from_json(Json::parse(scenario_to_json(sc).dump()));
  CHECK(back == sc);
  CHECK(back.channels == sc.channels);
  CHECK(back.distances_m == sc.distances_m);
}

TEST_CASE("scenario without channels is regenerated from params and seed") {
  const NetworkScenario sc = small(6);
  const Json doc = scenario_to_json(sc, false);
  CHECK_FALSE(doc.contains("channels"));
  CHECK(scenario_from_json(doc) == sc);
  CHECK_THROWS_AS(scenario_from_json(Json::object()), InvalidParameter);
}

TEST_CASE("report CSV has one column per header field") {
  const NetworkScenario sc = small(7);
  AlternateOptions o;
  o.restarts = 2;
  const Solution s = alternate_optimize(sc, o);
  const std::string header = report_csv_header(4);
  const std::string row = report_csv_row("s7", s.solver, s.report);
  CHECK(header.rfind("scenario_id,solver,y_comm,y_comp,y_total", 0) == 0);
  CHECK(count_fields(header) == 8 + 2 * 4);
  CHECK(count_fields(row) == count_fields(header));
  CHECK(row.rfind("s7,alternate,", 0) == 0);
}

TEST_CASE("numbers print with round-trip precision") {
  const double x = 0.1 + 0.2;
  CHECK(std::stod(csv_number(x)) == x);
  CHECK(csv_number(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(csv_number(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(csv_number(std::nan("")) == "nan");
}

TEST_CASE("solution JSON carries the report, allocation and trace") {
  const NetworkScenario sc = small(8);
  AlternateOptions o;
  o.restarts = 2;
  const Solution s = alternate_optimize(sc, o);
  const Json j = Json::parse(solution_to_json(s).dump());
  CHECK(j.at("solver") == "alternate");
  CHECK(j.at("report").at("y_total").get<double>() == s.report.total);
  CHECK(j.contains("allocation"));
  CHECK(j.contains("beamformers"));
  CHECK(j.at("outer_trace").size() == s.outer_trace.size());
  const Json r = report_to_json(s.report);
  CHECK(r.at("tasks").size() == 4);
}

TEST_CASE("trace and greedy step CSVs") {
  ConvergenceTrace t;
  t.objective = {3.0, 2.0, 1.5};
  t.system_error = {0.0, 0.1, 0.01};
  t.multiplier_gap = {1.0, 0.5, 0.4};
  t.iterations = 2;
  const std::string csv = trace_csv(t);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "iteration,rho,zeta,multiplier_gap");
  int rows = 0;
  while (std::getline(in, line)) rows += line.empty() ? 0 : 1;
  CHECK(rows == 3);

  const std::string steps = greedy_steps_csv({GreedyStep{{0, 1, 0}, 0.5, 1.0, 2.0, 3.0}});
  CHECK(steps.rfind("step,tx,rx,sub,eta,y_comm,y_comp,y_total", 0) == 0);
  CHECK(steps.find("\n1,0,1,0,0.5,1,2,3") != std::string::npos);
}

TEST_CASE("errors map to stable kinds") {
  CHECK(error_json(InvalidParameter("x")).at("error") == "invalid-parameter");
  CHECK(error_json(Infeasible("x")).at("error") == "infeasible");
  CHECK(error_json(TooLarge("x")).at("error") == "too-large");
  CHECK(error_json(InvalidState("x")).at("error") == "invalid-state");
  const Json j = error_json(std::runtime_error("boom"));
  CHECK(j.at("error") == "internal");
  CHECK(j.at("message") == "boom");
}
