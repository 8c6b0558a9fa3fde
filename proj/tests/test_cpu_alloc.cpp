#include "doctest.h"

#include <cmath>
#include <random>

#include "d2d/cpu_alloc.hpp"
#include "d2d/errors.hpp"
#include "support.hpp"

using namespace d2d;

namespace {

constexpr double kKappa = 3.5e-27;

CpuSubproblem make_problem(double capacity, std::vector<CpuTask> tasks) {
  CpuSubproblem sub;
  sub.capacity_hz = capacity;
  sub.energy_coefficient = kKappa;
  sub.tasks = std::move(tasks);
  return sub;
}

CpuTask task(int id, double beta, double bits, double mu = 200.0) { return {id, beta, mu, bits}; }

// Per-task cost ((1 - beta)/F + beta kappa F^2) mu I, written out independently.
double cost(const CpuTask& t, double f) {
  return ((1.0 - t.overhead_factor) / f + t.overhead_factor * kKappa * f * f) * t.cycles_per_bit * t.task_bits;
}

double stationarity_residual(const CpuTask& t, double f, double nu) {
  const double c = t.cycles_per_bit * t.task_bits;
  return -(1.0 - t.overhead_factor) * c / (f * f) + 2.0 * t.overhead_factor * kKappa * c * f + nu;
}

}  // namespace

TEST_CASE("unconstrained CPU minimiser agrees with a 1-D grid search") {
  const double closed = unconstrained_cpu_min(0.5, kKappa);
  CHECK(closed == doctest::Approx(5.228e8).epsilon(1e-3));
  // Log-spaced grid over [1e6, 1e10].
  double best_f = 0.0, best = std::numeric_limits<double>::infinity();
  for (int n = 0; n <= 400000; ++n) {
    const double f = 1e6 * std::pow(1e4, n / 400000.0);
    const double v = 0.5 / f + 0.5 * kKappa * f * f;
    if (v < best) {
      best = v;
      best_f = f;
    }
  }
  CHECK(std::abs(best_f / closed - 1.0) <= 1e-3);
}

TEST_CASE("doubling kappa divides the minimiser by the cube root of two") {
  for (double beta : {0.1, 0.5, 0.9})
    CHECK(unconstrained_cpu_min(beta, 2.0 * kKappa) ==
          doctest::Approx(unconstrained_cpu_min(beta, kKappa) / std::cbrt(2.0)).epsilon(1e-12));
}

TEST_CASE("unconstrained minimiser rejects boundary weights") {
  CHECK_THROWS_AS(unconstrained_cpu_min(0.0, kKappa), InvalidParameter);
  CHECK_THROWS_AS(unconstrained_cpu_min(1.0, kKappa), InvalidParameter);
}

TEST_CASE("single task below its unconstrained optimum takes the whole CPU") {
  const CpuSolution s = optimal_cpu_allocation(make_problem(2e8, {task(0, 0.5, 1e6)}));
  CHECK(s.cpu_hz[0] == doctest::Approx(2e8).epsilon(1e-8));
}

TEST_CASE("single task with ample CPU sits at its unconstrained optimum") {
  const CpuSolution s = optimal_cpu_allocation(make_problem(1e9, {task(0, 0.5, 1e6)}));
  CHECK(s.cpu_hz[0] == doctest::Approx(unconstrained_cpu_min(0.5, kKappa)).epsilon(1e-12));
  CHECK(s.multiplier == 0.0);
}

TEST_CASE("identical tasks split a tight CPU evenly") {
  const double cap = 1.5 * unconstrained_cpu_min(0.5, kKappa);
  const CpuSolution s = optimal_cpu_allocation(make_problem(cap, {task(0, 0.5, 4e6), task(1, 0.5, 4e6)}));
  CHECK(s.cpu_hz[0] == doctest::Approx(cap / 2).epsilon(1e-8));
  CHECK(s.cpu_hz[1] == doctest::Approx(cap / 2).epsilon(1e-8));
}

TEST_CASE("three mixed tasks match a simplex grid search") {
  const CpuSubproblem sub =
      make_problem(5e8, {task(0, 0.2, 1e6), task(1, 0.5, 4e6), task(2, 0.8, 8e6)});
  const CpuSolution s = optimal_cpu_allocation(sub);
  // Every task's free optimum exceeds 0.5 GHz, so the capacity binds and the
  // optimum lies on the face sum F = capacity; grid that face at 1e5 Hz.
  CHECK(s.cpu_hz[0] + s.cpu_hz[1] + s.cpu_hz[2] == doctest::Approx(5e8).epsilon(1e-8));
  const double step = 1e5;
  double best = std::numeric_limits<double>::infinity();
  for (double f0 = step; f0 < 5e8; f0 += step)
    for (double f1 = step; f0 + f1 < 5e8; f1 += step)
      best = std::min(best, cost(sub.tasks[0], f0) + cost(sub.tasks[1], f1) + cost(sub.tasks[2], 5e8 - f0 - f1));
  CHECK(s.objective <= best * (1.0 + 1e-9));
  CHECK(s.objective >= best * (1.0 - 0.005));
}

TEST_CASE("equal allocation") {
  CHECK(equal_cpu_allocation(make_problem(1e9, {task(0, 0.5, 1e6)})).cpu_hz[0] == 1e9);
  const CpuSolution four = equal_cpu_allocation(
      make_problem(1e9, {task(0, 0.5, 1e6), task(1, 0.2, 2e6), task(2, 0.9, 3e6), task(3, 0.0, 1e6)}));
  for (double f : four.cpu_hz) CHECK(f == doctest::Approx(2.5e8));
}

TEST_CASE("capacity below the per-task floor is infeasible") {
  CHECK_THROWS_AS(optimal_cpu_allocation(make_problem(1.5 * kMinCpuHz, {task(0, 0.5, 1e6), task(1, 0.5, 1e6)})),
                  Infeasible);
  CHECK_THROWS_AS(make_problem(0.0, {task(0, 0.5, 1e6)}).validate(), InvalidParameter);
  CHECK_THROWS_AS(make_problem(1e9, {}).validate(), InvalidParameter);
}

TEST_CASE("energy-only tasks sit on the floor and time-only tasks take the slack") {
  const CpuSolution s = optimal_cpu_allocation(make_problem(1e9, {task(0, 1.0, 1e6), task(1, 0.0, 1e6)}));
  CHECK(s.cpu_hz[0] == kMinCpuHz);
  CHECK(s.cpu_hz[0] + s.cpu_hz[1] == doctest::Approx(1e9).epsilon(1e-8));
}

TEST_CASE("random subproblems: feasibility, KKT and dominance") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> beta(0.0, 1.0), bits(1e6, 8e6), cap(1e8, 2e9);
  std::uniform_int_distribution<int> count(1, 4);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<CpuTask> tasks;
    const int n = count(rng);
    for (int m = 0; m < n; ++m) tasks.push_back(task(m, beta(rng), bits(rng)));
    const CpuSubproblem sub = make_problem(cap(rng), tasks);
    const CpuSolution s = optimal_cpu_allocation(sub);
    double used = 0.0;
    for (double f : s.cpu_hz) {
      CHECK(f >= kMinCpuHz);
      used += f;
    }
    CHECK(used <= sub.capacity_hz * (1.0 + 1e-8));
    CHECK(s.multiplier >= 0.0);
    for (size_t m = 0; m < tasks.size(); ++m) {
      const double scale = (1.0 - tasks[m].overhead_factor) * tasks[m].cycles() / (s.cpu_hz[m] * s.cpu_hz[m]);
      const double r = std::abs(stationarity_residual(tasks[m], s.cpu_hz[m], s.multiplier));
      CHECK(r <= 1e-6 * s.multiplier + 1e-6);
      CHECK(r <= 1e-6 * (scale + s.multiplier));
    }
    const CpuSolution eq = equal_cpu_allocation(sub);
    CHECK(s.objective <= eq.objective * (1.0 + 1e-12));
    CHECK(cpu_objective(sub, s.cpu_hz) == doctest::Approx(s.objective).epsilon(1e-12));
  }
}

TEST_CASE("network-wide allocation writes shares into the assignment") {
  NetworkScenario sc = testing::hand_scenario(3, 1, 1);
  sc.nodes[1].cpu_hz = 3e8;
  AllocationState alloc(3, 1);
  alloc.assign_offload(0, 1, 0);
  const double comp = allocate_cpu(alloc, sc, CpuPolicy::kOptimal);
  CHECK(alloc.cpu(0) + alloc.cpu(1) <= 3e8 * (1.0 + 1e-8));
  CHECK(alloc.cpu(2) == doctest::Approx(unconstrained_cpu_min(0.5, kKappa)).epsilon(1e-10));
  CHECK_NOTHROW(alloc.validate({1e9, 3e8, 1e9}));
  const double manual = cost(task(0, 0.5, 1e6), alloc.cpu(0)) + cost(task(1, 0.5, 1e6), alloc.cpu(1)) +
                        cost(task(2, 0.5, 1e6), alloc.cpu(2));
  CHECK(comp == doctest::Approx(manual).epsilon(1e-12));

  allocate_cpu(alloc, sc, CpuPolicy::kEqual);
  CHECK(alloc.cpu(0) == doctest::Approx(1.5e8));
  CHECK(alloc.cpu(2) == doctest::Approx(1e9));
}
