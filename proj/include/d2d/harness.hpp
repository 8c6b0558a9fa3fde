#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "d2d/serialize.hpp"
#include "d2d/solvers.hpp"

namespace d2d {

enum class SweepAxis { kNone, kNodes, kSubchannels, kAntennas, kBeta, kCsiTheta };

std::string_view axis_name(SweepAxis axis);
SweepAxis parse_axis(std::string_view name);

// Solver settings shared by every harness entry point.
struct SolverSettings {
  int restarts = 10;
  double tolerance = 1e-4;
  int max_outer = 20;
  AlternateOptions alternate(std::uint64_t seed) const;
};

struct ExperimentConfig {
  ScenarioParams base;
  SweepAxis axis = SweepAxis::kNone;
  std::vector<double> values{0.0};
  int replications = 20;
  std::uint64_t seed = 0;
  std::vector<SolverKind> solvers{SolverKind::kAlternate, SolverKind::kLocal};
  int threads = 0;  // replication workers; 0 uses every hardware thread
  SolverSettings solver;

  void validate() const;
};

// Params for one sweep value (csi_theta and none leave them unchanged).
ScenarioParams params_for(const ScenarioParams& base, SweepAxis axis, double value);

// Scenario seed of replication `rep`; shared across sweep values so that, for
// instance, every CSI level is evaluated on the same scenarios.
std::uint64_t replication_seed(std::uint64_t root, int rep);

struct SweepRow {
  double value = 0.0;
  int replication = 0;
  std::uint64_t scenario_seed = 0;
  std::string solver;
  double y_comm = 0.0;
  double y_comp = 0.0;
  double y_total = 0.0;
  double time_s = 0.0;
  double energy_j = 0.0;
  double runtime_s = 0.0;
  int outer_iterations = 0;
  int mcob_iterations = 0;
  int streams = 0;
  bool flagged = false;  // solver failed or produced an infeasible report
  std::string note;
};

struct SweepSummary {
  double value = 0.0;
  std::string solver;
  int count = 0;  // unflagged rows
  double mean_total = 0.0;
  double std_total = 0.0;
  double mean_comm = 0.0;
  double mean_comp = 0.0;
  double mean_runtime_s = 0.0;
  // Mean over replications of 1 - Y / Y_local; NaN when local was not run.
  double mean_reduction = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;  // sorted by value, replication, solver order
  std::vector<SweepSummary> summary;
};

// Optional progress hook, called after every row.
using RowCallback = std::function<void(const SweepRow&)>;

SweepResult run_sweep(const ExperimentConfig& config, const RowCallback& on_row = {});

std::string sweep_rows_csv(const SweepResult& result, SweepAxis axis);
std::string sweep_summary_csv(const SweepResult& result, SweepAxis axis);
Json sweep_to_json(const SweepResult& result, SweepAxis axis);

struct QueueConfig {
  ScenarioParams base;         // node population, radio and CPU settings
  int max_nodes = 30;
  double arrival_rate = 0.1;   // tasks per second per node
  double frame_s = 5.0;
  int frames = 8;
  double task_bits = 8e6;
  std::uint64_t seed = 0;
  SolverSettings solver;
  // Tasks already waiting before frame 1, one entry per node (optional).
  std::vector<int> initial_queue;

  void validate() const;
};

struct QueueFrame {
  int frame = 0;
  int arrivals = 0;
  int participants = 0;
  double y_alternate = 0.0;
  double y_local = 0.0;
  double reduction_pct = 0.0;
  std::vector<int> served;  // node ids
  int backlog = 0;          // tasks left waiting after the frame
};

std::vector<QueueFrame> queue_simulation(const QueueConfig& config);

// Scenario restricted to `members` with each task set to `task_bits` and
// channels drawn afresh from `channel_seed`.
NetworkScenario frame_scenario(const NetworkScenario& population, const std::vector<int>& members, double task_bits,
                               std::uint64_t channel_seed);

std::string queue_csv(const std::vector<QueueFrame>& frames);
Json queue_to_json(const std::vector<QueueFrame>& frames);

struct RuntimeConfig {
  ScenarioParams base;
  std::vector<int> nodes{4, 8, 16, 32};
  int repetitions = 3;
  std::uint64_t seed = 0;
  SolverSettings solver;

  RuntimeConfig();
  void validate() const;
};

struct RuntimePoint {
  int nodes = 0;
  double median_s = 0.0;
  double normalized = 0.0;  // median / median at the smallest K
};

struct RuntimeResult {
  std::vector<RuntimePoint> points;
  double slope = 0.0;  // least-squares slope of log(normalized) on log(K)
};

using TimedSolver = std::function<void(const NetworkScenario&)>;

// Median wall-clock of `solver` (default: alternate optimisation) per K.
RuntimeResult runtime_growth(const RuntimeConfig& config, const TimedSolver& solver = {});

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

std::string runtime_csv(const RuntimeResult& result);
Json runtime_to_json(const RuntimeResult& result);

// Configuration documents: {"scenario": {...}, "sweep": {"axis", "values"},
// "replications", "seed", "solvers", "restarts", "tolerance", "max_outer",
// "queue": {...}, "runtime": {...}}.
ExperimentConfig experiment_from_json(const Json& j);
QueueConfig queue_from_json(const Json& j);
RuntimeConfig runtime_from_json(const Json& j);

}  // namespace d2d
