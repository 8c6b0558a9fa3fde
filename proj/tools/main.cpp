// d2dopt: batch front end for scenario generation, single solves, sweeps,
// queue simulation and runtime measurement.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "d2d/errors.hpp"
#include "d2d/harness.hpp"
#include "d2d/serialize.hpp"
#include "d2d/solvers.hpp"

namespace {

using d2d::Json;

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string format = "csv";
  std::optional<int> restarts;
};

struct ScenarioFlags {
  std::optional<int> nodes;
  std::optional<int> subchannels;
  std::optional<int> antennas;
  std::optional<double> beta;
};

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw d2d::InvalidParameter("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw d2d::InvalidParameter("'" + path + "' is not valid JSON: " + e.what());
  }
}

Json load_config(const Common& c) { return c.config_path.empty() ? Json::object() : read_json_file(c.config_path); }

// Folds flag values into the JSON document so that flags win over the file.
void apply_common(Json& doc, const Common& c) {
  if (c.seed) doc["seed"] = *c.seed;
  if (c.restarts) doc["restarts"] = *c.restarts;
}

void apply_scenario(Json& doc, const ScenarioFlags& f) {
  if (!doc.contains("scenario")) doc["scenario"] = Json::object();
  Json& s = doc["scenario"];
  if (f.nodes) s["nodes"] = *f.nodes;
  if (f.subchannels) s["subchannels"] = *f.subchannels;
  if (f.antennas) s["antennas"] = *f.antennas;
  if (f.beta) s["overhead_factor"] = *f.beta;
}

void emit(const Common& c, const std::string& filename, const std::string& content) {
  if (c.out_dir.empty()) {
    std::cout << content;
    if (!content.empty() && content.back() != '\n') std::cout << '\n';
    return;
  }
  std::filesystem::create_directories(c.out_dir);
  const auto path = std::filesystem::path(c.out_dir) / filename;
  std::ofstream out(path);
  if (!out) throw d2d::InvalidParameter("cannot write '" + path.string() + "'");
  out << content;
}

bool want_json(const Common& c) { return c.format == "json"; }

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config_path, "JSON configuration file")->check(CLI::ExistingFile);
  app->add_option("--seed", c.seed, "root seed");
  app->add_option("--out", c.out_dir, "output directory (default: stdout)");
  app->add_option("--format", c.format, "output format")->check(CLI::IsMember({"csv", "json"}));
  app->add_option("--restarts", c.restarts, "random restarts of the alternate solver");
}

void add_scenario_flags(CLI::App* app, ScenarioFlags& f) {
  app->add_option("--nodes", f.nodes, "number of nodes K");
  app->add_option("--subchannels", f.subchannels, "number of subchannels S");
  app->add_option("--antennas", f.antennas, "antennas per node N");
  app->add_option("--beta", f.beta, "time/energy weighting factor");
}

std::uint64_t seed_of(const Json& doc) { return doc.contains("seed") ? doc.at("seed").get<std::uint64_t>() : 0; }

d2d::NetworkScenario scenario_from_doc(const Json& doc) {
  const d2d::ScenarioParams params =
      doc.contains("scenario") ? d2d::params_from_json(doc.at("scenario")) : d2d::ScenarioParams{};
  return d2d::generate_scenario(params, seed_of(doc));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint offloading, subchannel, CPU and beamforming optimisation for D2D edge networks", "d2dopt"};
  app.require_subcommand(1);

  Common common;
  ScenarioFlags scenario_flags;

  auto* generate = app.add_subcommand("generate", "draw a scenario and write it as JSON");
  add_common(generate, common);
  add_scenario_flags(generate, scenario_flags);
  bool omit_channels = false;
  generate->add_flag("--no-channels", omit_channels, "store params and seed only");

  auto* solve = app.add_subcommand("solve", "optimise one scenario");
  add_common(solve, common);
  add_scenario_flags(solve, scenario_flags);
  std::string solver_name = "alternate";
  std::string scenario_path;
  solve->add_option("--solver", solver_name, "alternate|exhaustive|local|wmmse|equal-cpu");
  solve->add_option("--scenario", scenario_path, "scenario JSON written by 'generate'")->check(CLI::ExistingFile);

  auto* sweep = app.add_subcommand("sweep", "replicated experiment over one parameter axis");
  add_common(sweep, common);
  add_scenario_flags(sweep, scenario_flags);
  std::optional<std::string> axis;
  std::vector<double> values;
  std::optional<int> replications;
  std::vector<std::string> solvers;
  std::optional<int> threads;
  sweep->add_option("--axis", axis, "none|nodes|subchannels|antennas|beta|csi_theta");
  sweep->add_option("--values", values, "sweep values")->delimiter(',');
  sweep->add_option("--replications", replications, "scenarios per sweep value");
  sweep->add_option("--solvers", solvers, "solvers to run")->delimiter(',');
  sweep->add_option("--threads", threads, "replication workers (0: all cores)");

  auto* queue = app.add_subcommand("queue-sim", "frame-by-frame simulation with Poisson task arrivals");
  add_common(queue, common);
  std::optional<int> max_nodes, frames;
  std::optional<double> arrival_rate, frame_s;
  queue->add_option("--max-nodes", max_nodes, "node population");
  queue->add_option("--arrival-rate", arrival_rate, "tasks per second per node");
  queue->add_option("--frame-period", frame_s, "frame length in seconds");
  queue->add_option("--frames", frames, "number of frames");

  auto* runtime = app.add_subcommand("runtime", "wall-clock growth of the alternate solver in K");
  add_common(runtime, common);
  std::vector<int> runtime_nodes;
  std::optional<int> repetitions;
  runtime->add_option("--node-counts", runtime_nodes, "ascending K values")->delimiter(',');
  runtime->add_option("--repetitions", repetitions, "timed runs per K");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << Json{{"error", "usage"}, {"message", e.what()}}.dump() << '\n';
    return 2;
  }

  try {
    Json doc = load_config(common);
    apply_common(doc, common);

    if (*generate) {
      apply_scenario(doc, scenario_flags);
      const d2d::NetworkScenario sc = scenario_from_doc(doc);
      emit(common, "scenario.json", d2d::scenario_to_json(sc, !omit_channels).dump(2));
    } else if (*solve) {
      apply_scenario(doc, scenario_flags);
      const d2d::NetworkScenario sc =
          scenario_path.empty() ? scenario_from_doc(doc) : d2d::scenario_from_json(read_json_file(scenario_path));
      d2d::SolverSettings settings;
      if (doc.contains("restarts")) settings.restarts = doc.at("restarts").get<int>();
      if (doc.contains("tolerance")) settings.tolerance = doc.at("tolerance").get<double>();
      if (doc.contains("max_outer")) settings.max_outer = doc.at("max_outer").get<int>();
      const d2d::SolverKind kind = d2d::parse_solver(solver_name);
      const d2d::Solution s = d2d::run_solver(kind, sc, settings.alternate(seed_of(doc)), sc.channels);
      if (want_json(common)) {
        emit(common, "solution.json", d2d::solution_to_json(s).dump(2));
      } else {
        emit(common, "solution.csv",
             d2d::report_csv_header(sc.node_count()) + "\n" +
                 d2d::report_csv_row(std::to_string(sc.seed), s.solver, s.report) + "\n");
      }
    } else if (*sweep) {
      apply_scenario(doc, scenario_flags);
      if (axis || !values.empty()) {
        Json& s = doc["sweep"];
        if (!s.is_object()) s = Json::object();
        if (axis) s["axis"] = *axis;
        if (!values.empty()) s["values"] = values;
      }
      if (replications) doc["replications"] = *replications;
      if (!solvers.empty()) doc["solvers"] = solvers;
      if (threads) doc["threads"] = *threads;
      const d2d::ExperimentConfig config = d2d::experiment_from_json(doc);
      const d2d::SweepResult result = d2d::run_sweep(config);
      if (want_json(common)) {
        emit(common, "sweep.json", d2d::sweep_to_json(result, config.axis).dump(2));
      } else if (common.out_dir.empty()) {
        std::cout << d2d::sweep_rows_csv(result, config.axis) << '\n'
                  << d2d::sweep_summary_csv(result, config.axis);
      } else {
        emit(common, "rows.csv", d2d::sweep_rows_csv(result, config.axis));
        emit(common, "summary.csv", d2d::sweep_summary_csv(result, config.axis));
      }
    } else if (*queue) {
      if (max_nodes || arrival_rate || frame_s || frames) {
        Json& q = doc["queue"];
        if (!q.is_object()) q = Json::object();
        if (max_nodes) q["max_nodes"] = *max_nodes;
        if (arrival_rate) q["arrival_rate"] = *arrival_rate;
        if (frame_s) q["frame_s"] = *frame_s;
        if (frames) q["frames"] = *frames;
      }
      const auto frames_out = d2d::queue_simulation(d2d::queue_from_json(doc));
      if (want_json(common))
        emit(common, "queue.json", d2d::queue_to_json(frames_out).dump(2));
      else
        emit(common, "queue.csv", d2d::queue_csv(frames_out));
    } else if (*runtime) {
      if (!runtime_nodes.empty() || repetitions) {
        Json& r = doc["runtime"];
        if (!r.is_object()) r = Json::object();
        if (!runtime_nodes.empty()) r["nodes"] = runtime_nodes;
        if (repetitions) r["repetitions"] = *repetitions;
      }
      const auto result = d2d::runtime_growth(d2d::runtime_from_json(doc));
      if (want_json(common))
        emit(common, "runtime.json", d2d::runtime_to_json(result).dump(2));
      else
        emit(common, "runtime.csv", d2d::runtime_csv(result));
    }
  } catch (const std::exception& e) {
    std::cerr << d2d::error_json(e).dump() << '\n';
    return 1;
  }
  return 0;
}
