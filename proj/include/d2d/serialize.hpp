#pragma once

#include <exception>
#include <string>
#include <vector>

#include "json.hpp"

#include "d2d/mcob.hpp"
#include "d2d/overhead.hpp"
#include "d2d/scenario.hpp"
#include "d2d/solvers.hpp"
#include "d2d/topology.hpp"

namespace d2d {

using Json = nlohmann::json;

// Parameters in linear units (keys ending _w, _hz, _bits, ...). Ingestion also
// accepts power_budget_dbw / noise_power_dbw / circuit_power_dbw; giving both
// spellings of one quantity is an error, as is any unknown key. Missing keys
// keep their defaults.
Json params_to_json(const ScenarioParams& params);
ScenarioParams params_from_json(const Json& j);

// Full scenario; channel entries are [re, im] pairs nested as
// channels[tx][rx][sub][row][col]. Without channels, the document holds only
// params and seed and is regenerated on load.
Json scenario_to_json(const NetworkScenario& scenario, bool include_channels = true);
NetworkScenario scenario_from_json(const Json& j);

Json complex_vector_to_json(const CVector& v);

// Flat CSV row: scenario id, solver, totals, then y_comm_k / y_comp_k per task.
std::string report_csv_header(int nodes);
std::string report_csv_row(const std::string& scenario_id, const std::string& solver, const OverheadReport& report);
Json report_to_json(const OverheadReport& report);

Json solution_to_json(const Solution& solution);

// iteration,rho,zeta,multiplier_gap
std::string trace_csv(const ConvergenceTrace& trace);

// step,tx,rx,sub,eta,y_comm,y_comp,y_total
std::string greedy_steps_csv(const std::vector<GreedyStep>& steps);

// {"error": <kind>, "message": <what>}
Json error_json(const std::exception& e);

// Formats a double for CSV with round-trip precision; non-finite values print
// as inf / -inf / nan.
std::string csv_number(double x);

}  // namespace d2d
