#include "d2d/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <set>
#include <mutex>
#include <sstream>
#include <thread>

#include "d2d/errors.hpp"

namespace d2d {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_keys(const Json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw InvalidParameter(where + " must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (!known.contains(key)) throw InvalidParameter("unknown key '" + key + "' in " + where);
}

SolverSettings settings_from(const Json& j) {
  SolverSettings s;
  if (j.contains("restarts")) s.restarts = j.at("restarts").get<int>();
  if (j.contains("tolerance")) s.tolerance = j.at("tolerance").get<double>();
  if (j.contains("max_outer")) s.max_outer = j.at("max_outer").get<int>();
  return s;
}

const std::set<std::string> kTopLevelKeys = {"scenario", "sweep",     "replications", "seed",    "solvers",
                                             "restarts", "tolerance", "max_outer",    "queue",   "runtime", "threads"};

template <typename Fn>
auto json_guard(Fn&& fn) {
  try {
    return fn();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidParameter(std::string("malformed configuration: ") + e.what());
  }
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? kNaN : s / static_cast<double>(v.size());
}

double stddev_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::string_view axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kNone: return "none";
    case SweepAxis::kNodes: return "nodes";
    case SweepAxis::kSubchannels: return "subchannels";
    case SweepAxis::kAntennas: return "antennas";
    case SweepAxis::kBeta: return "beta";
    case SweepAxis::kCsiTheta: return "csi_theta";
  }
  return "none";
}

SweepAxis parse_axis(std::string_view name) {
  for (SweepAxis a : {SweepAxis::kNone, SweepAxis::kNodes, SweepAxis::kSubchannels, SweepAxis::kAntennas,
                      SweepAxis::kBeta, SweepAxis::kCsiTheta})
    if (axis_name(a) == name) return a;
  throw InvalidParameter("unknown sweep axis '" + std::string(name) + "'");
}

AlternateOptions SolverSettings::alternate(std::uint64_t seed) const {
  AlternateOptions o;
  o.restarts = restarts;
  o.tolerance = tolerance;
  o.max_outer = max_outer;
  o.seed = seed;
  return o;
}

void ExperimentConfig::validate() const {
  base.validate();
  if (values.empty()) throw InvalidParameter("sweep value list must not be empty");
  if (replications < 1) throw InvalidParameter("replication count must be >= 1");
  if (solvers.empty()) throw InvalidParameter("solver list must not be empty");
  if (solver.restarts < 1) throw InvalidParameter("restarts must be >= 1");
  for (double v : values) params_for(base, axis, v).validate();
  if (axis == SweepAxis::kCsiTheta)
    for (double v : values)
      if (!(v >= 0.0)) throw InvalidParameter("CSI distortion ratios must be non-negative");
}

ScenarioParams params_for(const ScenarioParams& base, SweepAxis axis, double value) {
  ScenarioParams p = base;
  const auto as_count = [&](const char* what) {
    if (value != std::floor(value) || value < 1.0)
      throw InvalidParameter(std::string(what) + " sweep values must be positive integers");
    return static_cast<int>(value);
  };
  switch (axis) {
    case SweepAxis::kNodes:
      p.nodes = as_count("node");
      p.overhead_factors.clear();
      p.power_budgets_w.clear();
      break;
    case SweepAxis::kSubchannels: p.subchannels = as_count("subchannel"); break;
    case SweepAxis::kAntennas: p.antennas = as_count("antenna"); break;
    case SweepAxis::kBeta:
      p.overhead_factor = value;
      p.overhead_factors.clear();
      break;
    case SweepAxis::kNone:
    case SweepAxis::kCsiTheta: break;
  }
  return p;
}

std::uint64_t replication_seed(std::uint64_t root, int rep) {
  return derive_seed(root, SeedStream::kSweep, static_cast<std::uint64_t>(rep));
}

namespace {

std::vector<SweepRow> run_replication(const ExperimentConfig& config, double value, int rep) {
  const ScenarioParams params = params_for(config.base, config.axis, value);
  const std::uint64_t seed = replication_seed(config.seed, rep);
  const NetworkScenario scenario = generate_scenario(params, seed);
  const bool distorted = config.axis == SweepAxis::kCsiTheta && value > 0.0;
  const ChannelSet estimate = distorted ? distort_csi(scenario.channels, value, seed) : ChannelSet{};
  const ChannelSet& design_channels = distorted ? estimate : scenario.channels;
  std::vector<SweepRow> rows;
  for (SolverKind kind : config.solvers) {
    SweepRow row;
    row.value = value;
    row.replication = rep;
    row.scenario_seed = seed;
    row.solver = std::string(solver_name(kind));
    try {
      const Solution s = run_solver(kind, scenario, config.solver.alternate(seed), design_channels);
      const OverheadReport report = distorted ? evaluate_on(s, scenario.channels, scenario) : s.report;
      row.y_comm = report.comm_total;
      row.y_comp = report.comp_total;
      row.y_total = report.total;
      row.time_s = report.time_total;
      row.energy_j = report.energy_total;
      row.runtime_s = s.wall_seconds;
      row.outer_iterations = s.outer_iterations;
      row.mcob_iterations = s.mcob_iterations;
      row.streams = s.alloc.offload_count();
      if (!report.feasible) {
        row.flagged = true;
        row.note = "infeasible report";
      }
    } catch (const std::exception& e) {
      row.flagged = true;
      row.note = error_json(e).dump();
      row.y_comm = row.y_comp = row.y_total = row.time_s = row.energy_j = kNaN;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

SweepResult run_sweep(const ExperimentConfig& config, const RowCallback& on_row) {
  config.validate();
  const size_t reps = static_cast<size_t>(config.replications);
  const size_t jobs = config.values.size() * reps;
  std::vector<std::vector<SweepRow>> slots(jobs);
  std::atomic<size_t> next{0};
  std::mutex emit;
  std::exception_ptr failure;
  auto worker = [&] {
    for (size_t job = next++; job < jobs; job = next++) {
      try {
        slots[job] = run_replication(config, config.values[job / reps], static_cast<int>(job % reps));
        if (on_row) {
          const std::lock_guard lock(emit);
          for (const auto& row : slots[job]) on_row(row);
        }
      } catch (...) {
        const std::lock_guard lock(emit);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int threads = std::min<int>(config.threads > 0 ? config.threads
                                                       : std::max(1u, std::thread::hardware_concurrency()),
                                    static_cast<int>(jobs));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  SweepResult result;
  for (auto& slot : slots)
    for (auto& row : slot) result.rows.push_back(std::move(row));

  for (double value : config.values) {
    for (SolverKind kind : config.solvers) {
      const std::string name(solver_name(kind));
      SweepSummary sum;
      sum.value = value;
      sum.solver = name;
      std::vector<double> totals, comms, comps, runtimes, reductions;
      for (const auto& row : result.rows) {
        if (row.value != value || row.solver != name || row.flagged) continue;
        totals.push_back(row.y_total);
        comms.push_back(row.y_comm);
        comps.push_back(row.y_comp);
        runtimes.push_back(row.runtime_s);
        for (const auto& local : result.rows)
          if (local.value == value && local.replication == row.replication && local.solver == "local" &&
              !local.flagged && local.y_total > 0.0)
            reductions.push_back(1.0 - row.y_total / local.y_total);
      }
      sum.count = static_cast<int>(totals.size());
      sum.mean_total = mean_of(totals);
      sum.std_total = stddev_of(totals);
      sum.mean_comm = mean_of(comms);
      sum.mean_comp = mean_of(comps);
      sum.mean_runtime_s = mean_of(runtimes);
      sum.mean_reduction = mean_of(reductions);
      result.summary.push_back(sum);
    }
  }
  return result;
}

std::string sweep_rows_csv(const SweepResult& result, SweepAxis axis) {
  std::ostringstream out;
  out << "axis,value,replication,scenario_seed,solver,y_comm,y_comp,y_total,time_s,energy_j,runtime_s,"
         "outer_iterations,mcob_iterations,streams,flagged,note\n";
  for (const auto& r : result.rows) {
    std::string note = r.note;
    std::replace(note.begin(), note.end(), ',', ';');
    std::replace(note.begin(), note.end(), '"', '\'');
    out << axis_name(axis) << ',' << csv_number(r.value) << ',' << r.replication << ',' << r.scenario_seed << ','
        << r.solver << ',' << csv_number(r.y_comm) << ',' << csv_number(r.y_comp) << ',' << csv_number(r.y_total)
        << ',' << csv_number(r.time_s) << ',' << csv_number(r.energy_j) << ',' << csv_number(r.runtime_s) << ','
        << r.outer_iterations << ',' << r.mcob_iterations << ',' << r.streams << ',' << (r.flagged ? 1 : 0) << ','
        << note << '\n';
  }
  return out.str();
}

std::string sweep_summary_csv(const SweepResult& result, SweepAxis axis) {
  std::ostringstream out;
  out << "axis,value,solver,count,mean_y_total,std_y_total,mean_y_comm,mean_y_comp,mean_runtime_s,"
         "mean_reduction_vs_local\n";
  for (const auto& s : result.summary)
    out << axis_name(axis) << ',' << csv_number(s.value) << ',' << s.solver << ',' << s.count << ','
        << csv_number(s.mean_total) << ',' << csv_number(s.std_total) << ',' << csv_number(s.mean_comm) << ','
        << csv_number(s.mean_comp) << ',' << csv_number(s.mean_runtime_s) << ',' << csv_number(s.mean_reduction)
        << '\n';
  return out.str();
}

Json sweep_to_json(const SweepResult& result, SweepAxis axis) {
  // JSON has no NaN; missing values become null.
  const auto num = [](double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); };
  Json rows = Json::array();
  for (const auto& r : result.rows)
    rows.push_back({{"value", r.value},
                    {"replication", r.replication},
                    {"scenario_seed", r.scenario_seed},
                    {"solver", r.solver},
                    {"y_comm", num(r.y_comm)},
                    {"y_comp", num(r.y_comp)},
                    {"y_total", num(r.y_total)},
                    {"time_s", num(r.time_s)},
                    {"energy_j", num(r.energy_j)},
                    {"runtime_s", r.runtime_s},
                    {"outer_iterations", r.outer_iterations},
                    {"mcob_iterations", r.mcob_iterations},
                    {"streams", r.streams},
                    {"flagged", r.flagged},
                    {"note", r.note}});
  Json summary = Json::array();
  for (const auto& s : result.summary)
    summary.push_back({{"value", s.value},
                       {"solver", s.solver},
                       {"count", s.count},
                       {"mean_y_total", num(s.mean_total)},
                       {"std_y_total", num(s.std_total)},
                       {"mean_y_comm", num(s.mean_comm)},
                       {"mean_y_comp", num(s.mean_comp)},
                       {"mean_runtime_s", num(s.mean_runtime_s)},
                       {"mean_reduction_vs_local", num(s.mean_reduction)}});
  return {{"axis", std::string(axis_name(axis))}, {"rows", rows}, {"summary", summary}};
}

void QueueConfig::validate() const {
  if (max_nodes < 1) throw InvalidParameter("queue population must have at least one node");
  if (!(arrival_rate > 0.0)) throw InvalidParameter("arrival rate must be positive");
  if (!(frame_s > 0.0)) throw InvalidParameter("frame period must be positive");
  if (frames < 1) throw InvalidParameter("frame count must be >= 1");
  if (!(task_bits > 0.0)) throw InvalidParameter("task size must be positive");
  if (!initial_queue.empty() && static_cast<int>(initial_queue.size()) != max_nodes)
    throw InvalidParameter("initial queue must have one entry per node");
  for (int q : initial_queue)
    if (q < 0) throw InvalidParameter("initial queue lengths must be non-negative");
}

NetworkScenario frame_scenario(const NetworkScenario& population, const std::vector<int>& members, double task_bits,
                               std::uint64_t channel_seed) {
  const int n = static_cast<int>(members.size());
  NetworkScenario sc;
  sc.params = population.params;
  sc.params.nodes = n;
  sc.params.overhead_factors.clear();
  sc.params.power_budgets_w.clear();
  sc.seed = channel_seed;
  sc.distances_m = Eigen::MatrixXd::Zero(n, n);
  for (int a = 0; a < n; ++a) {
    NodeProfile node = population.nodes[static_cast<size_t>(members[static_cast<size_t>(a)])];
    node.task_bits = task_bits;
    sc.nodes.push_back(node);
    sc.params.overhead_factors.push_back(node.overhead_factor);
    sc.params.power_budgets_w.push_back(node.power_budget_w);
    for (int b = 0; b < n; ++b)
      sc.distances_m(a, b) = population.distances_m(members[static_cast<size_t>(a)], members[static_cast<size_t>(b)]);
  }
  sc.channels = draw_channels(sc.params, sc.distances_m, channel_seed);
  return sc;
}

std::vector<QueueFrame> queue_simulation(const QueueConfig& config) {
  config.validate();
  ScenarioParams params = config.base;
  params.nodes = config.max_nodes;
  params.overhead_factors.clear();
  params.power_budgets_w.clear();
  const NetworkScenario population = generate_scenario(params, config.seed);

  std::vector<int> queue = config.initial_queue;
  queue.resize(static_cast<size_t>(config.max_nodes), 0);
  Rng arrivals_rng = make_rng(config.seed, SeedStream::kQueue, 0);
  std::poisson_distribution<int> arrivals(config.arrival_rate * config.frame_s);

  std::vector<QueueFrame> out;
  for (int t = 1; t <= config.frames; ++t) {
    QueueFrame frame;
    frame.frame = t;
    // Tasks generated during the preceding period wait for this frame.
    for (int& q : queue) {
      const int a = arrivals(arrivals_rng);
      q += a;
      frame.arrivals += a;
    }
    for (int k = 0; k < config.max_nodes; ++k)
      if (queue[static_cast<size_t>(k)] > 0) frame.served.push_back(k);
    frame.participants = static_cast<int>(frame.served.size());
    if (!frame.served.empty()) {
      const NetworkScenario sc = frame_scenario(population, frame.served, config.task_bits,
                                                derive_seed(config.seed, SeedStream::kQueue, static_cast<std::uint64_t>(t)));
      const Solution alt =
          alternate_optimize(sc, config.solver.alternate(derive_seed(config.seed, SeedStream::kSolver, t)));
      const Solution loc = local_only(sc);
      frame.y_alternate = alt.report.total;
      frame.y_local = loc.report.total;
      frame.reduction_pct = 100.0 * (1.0 - alt.report.total / loc.report.total);
      for (int k : frame.served) --queue[static_cast<size_t>(k)];
    }
    for (int q : queue) frame.backlog += q;
    out.push_back(std::move(frame));
  }
  return out;
}

std::string queue_csv(const std::vector<QueueFrame>& frames) {
  std::ostringstream out;
  out << "frame,arrivals,participants,y_alternate,y_local,reduction_pct,backlog\n";
  for (const auto& f : frames)
    out << f.frame << ',' << f.arrivals << ',' << f.participants << ',' << csv_number(f.y_alternate) << ','
        << csv_number(f.y_local) << ',' << csv_number(f.reduction_pct) << ',' << f.backlog << '\n';
  return out.str();
}

Json queue_to_json(const std::vector<QueueFrame>& frames) {
  Json out = Json::array();
  for (const auto& f : frames)
    out.push_back({{"frame", f.frame},
                   {"arrivals", f.arrivals},
                   {"participants", f.participants},
                   {"served", f.served},
                   {"y_alternate", f.y_alternate},
                   {"y_local", f.y_local},
                   {"reduction_pct", f.reduction_pct},
                   {"backlog", f.backlog}});
  return out;
}

RuntimeConfig::RuntimeConfig() {
  base.subchannels = 1;
  base.antennas = 5;
}

void RuntimeConfig::validate() const {
  base.validate();
  if (nodes.empty()) throw InvalidParameter("runtime node list must not be empty");
  if (!std::is_sorted(nodes.begin(), nodes.end()) || nodes.front() < 1)
    throw InvalidParameter("runtime node list must be positive and ascending");
  if (repetitions < 1) throw InvalidParameter("runtime repetitions must be >= 1");
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidParameter("slope fit needs at least two points");
  double mx = 0.0, my = 0.0;
  for (size_t n = 0; n < x.size(); ++n) {
    mx += std::log(x[n]);
    my += std::log(y[n]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0.0, sxx = 0.0;
  for (size_t n = 0; n < x.size(); ++n) {
    const double dx = std::log(x[n]) - mx;
    sxy += dx * (std::log(y[n]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) throw InvalidParameter("slope fit needs distinct x values");
  return sxy / sxx;
}

RuntimeResult runtime_growth(const RuntimeConfig& config, const TimedSolver& solver) {
  config.validate();
  RuntimeResult result;
  for (int K : config.nodes) {
    ScenarioParams p = config.base;
    p.nodes = K;
    p.overhead_factors.clear();
    p.power_budgets_w.clear();
    std::vector<double> times;
    for (int rep = 0; rep < config.repetitions; ++rep) {
      const std::uint64_t seed = replication_seed(config.seed, rep);
      const NetworkScenario sc = generate_scenario(p, seed);
      const auto start = std::chrono::steady_clock::now();
      if (solver)
        solver(sc);
      else
        alternate_optimize(sc, config.solver.alternate(seed));
      times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    }
    result.points.push_back({K, median_of(times), 0.0});
  }
  // Guard against a zero timer reading on trivial solvers.
  const double floor_s = 1e-9;
  const double ref = std::max(result.points.front().median_s, floor_s);
  std::vector<double> xs, ys;
  for (auto& pt : result.points) {
    pt.normalized = std::max(pt.median_s, floor_s) / ref;
    xs.push_back(pt.nodes);
    ys.push_back(pt.normalized);
  }
  result.slope = result.points.size() >= 2 ? loglog_slope(xs, ys) : 0.0;
  return result;
}

std::string runtime_csv(const RuntimeResult& result) {
  std::ostringstream out;
  out << "nodes,median_s,normalized\n";
  for (const auto& p : result.points)
    out << p.nodes << ',' << csv_number(p.median_s) << ',' << csv_number(p.normalized) << '\n';
  out << "# slope," << csv_number(result.slope) << '\n';
  return out.str();
}

Json runtime_to_json(const RuntimeResult& result) {
  Json pts = Json::array();
  for (const auto& p : result.points)
    pts.push_back({{"nodes", p.nodes}, {"median_s", p.median_s}, {"normalized", p.normalized}});
  return {{"points", pts}, {"slope", result.slope}};
}

ExperimentConfig experiment_from_json(const Json& j) {
  check_keys(j, kTopLevelKeys, "configuration");
  return json_guard([&] {
    ExperimentConfig c;
    if (j.contains("scenario")) c.base = params_from_json(j.at("scenario"));
    if (j.contains("sweep")) {
      const Json& s = j.at("sweep");
      check_keys(s, {"axis", "values"}, "sweep");
      if (s.contains("axis")) c.axis = parse_axis(s.at("axis").get<std::string>());
      if (s.contains("values")) c.values = s.at("values").get<std::vector<double>>();
    }
    if (j.contains("replications")) c.replications = j.at("replications").get<int>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("solvers")) {
      c.solvers.clear();
      for (const auto& name : j.at("solvers")) c.solvers.push_back(parse_solver(name.get<std::string>()));
    }
    if (j.contains("threads")) c.threads = j.at("threads").get<int>();
    c.solver = settings_from(j);
    c.validate();
    return c;
  });
}

QueueConfig queue_from_json(const Json& j) {
  check_keys(j, kTopLevelKeys, "configuration");
  return json_guard([&] {
    QueueConfig c;
    if (j.contains("scenario")) c.base = params_from_json(j.at("scenario"));
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    c.solver = settings_from(j);
    if (j.contains("queue")) {
      const Json& q = j.at("queue");
      check_keys(q, {"max_nodes", "arrival_rate", "frame_s", "frames", "task_bits", "initial_queue"}, "queue");
      if (q.contains("max_nodes")) c.max_nodes = q.at("max_nodes").get<int>();
      if (q.contains("arrival_rate")) c.arrival_rate = q.at("arrival_rate").get<double>();
      if (q.contains("frame_s")) c.frame_s = q.at("frame_s").get<double>();
      if (q.contains("frames")) c.frames = q.at("frames").get<int>();
      if (q.contains("task_bits")) c.task_bits = q.at("task_bits").get<double>();
      if (q.contains("initial_queue")) c.initial_queue = q.at("initial_queue").get<std::vector<int>>();
    }
    c.validate();
    return c;
  });
}

RuntimeConfig runtime_from_json(const Json& j) {
  check_keys(j, kTopLevelKeys, "configuration");
  return json_guard([&] {
    RuntimeConfig c;
    if (j.contains("scenario")) c.base = params_from_json(j.at("scenario"));
    c.base.subchannels = 1;
    c.base.antennas = 5;
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    c.solver = settings_from(j);
    if (j.contains("runtime")) {
      const Json& r = j.at("runtime");
      check_keys(r, {"nodes", "repetitions", "subchannels", "antennas"}, "runtime");
      if (r.contains("nodes")) c.nodes = r.at("nodes").get<std::vector<int>>();
      if (r.contains("repetitions")) c.repetitions = r.at("repetitions").get<int>();
      if (r.contains("subchannels")) c.base.subchannels = r.at("subchannels").get<int>();
      if (r.contains("antennas")) c.base.antennas = r.at("antennas").get<int>();
    }
    c.validate();
    return c;
  });
}

}  // namespace d2d
