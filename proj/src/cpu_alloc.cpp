#include "d2d/cpu_alloc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "d2d/errors.hpp"

namespace d2d {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double floored(double hz) { return std::max(hz, kMinCpuHz); }

// Per-task share at the unconstrained optimum (before flooring).
double free_optimum(const CpuTask& t, double kappa) {
  if (t.overhead_factor <= 0.0) return kInf;
  if (t.overhead_factor >= 1.0) return 0.0;
  return unconstrained_cpu_min(t.overhead_factor, kappa);
}

struct Demand {
  double total = 0.0;
  double slope = 0.0;  // d total / d nu
};

Demand demand_at(const CpuSubproblem& sub, double nu) {
  Demand d;
  for (const auto& t : sub.tasks) {
    const double f = cpu_at_multiplier(t.overhead_factor, sub.energy_coefficient, t.cycles(), nu);
    if (f > kMinCpuHz) {
      d.total += f;
      const double a = 2.0 * t.overhead_factor * sub.energy_coefficient * t.cycles();
      // Implicit derivative of a F^3 + nu F^2 = const.
      d.slope -= f * f / (3.0 * a * f * f + 2.0 * nu * f);
    } else {
      d.total += kMinCpuHz;
    }
  }
  return d;
}

}  // namespace

void CpuSubproblem::validate() const {
  if (!(capacity_hz > 0.0)) throw InvalidParameter("CPU capacity must be positive");
  if (!(energy_coefficient > 0.0)) throw InvalidParameter("energy coefficient must be positive");
  if (tasks.empty()) throw InvalidParameter("CPU subproblem needs at least one task");
  for (const auto& t : tasks) {
    if (!(t.overhead_factor >= 0.0 && t.overhead_factor <= 1.0))
      throw InvalidParameter("overhead factor must lie in [0, 1]");
    if (!(t.cycles() > 0.0)) throw InvalidParameter("task cycles must be positive");
  }
}

double unconstrained_cpu_min(double beta, double kappa) {
  if (!(beta > 0.0 && beta < 1.0) || !(kappa > 0.0))
    throw InvalidParameter("unconstrained CPU minimiser needs 0 < beta < 1 and kappa > 0");
  return std::cbrt((1.0 - beta) / (2.0 * beta * kappa));
}

double cpu_at_multiplier(double beta, double kappa, double cycles, double nu) {
  const double a = 2.0 * beta * kappa * cycles;
  const double d = (1.0 - beta) * cycles;
  if (d <= 0.0) return 0.0;
  if (a <= 0.0) return nu > 0.0 ? std::sqrt(d / nu) : kInf;
  // p(F) = a F^3 + nu F^2 - d is increasing and convex on F > 0, so Newton
  // started right of the root decreases monotonically onto it.
  double f = std::cbrt(d / a);
  if (nu > 0.0) f = std::min(f, std::sqrt(d / nu));
  double lo = 0.0;
  double hi = f;
  for (int it = 0; it < 100; ++it) {
    const double p = (a * f + nu) * f * f - d;
    if (p == 0.0) return f;
    if (p > 0.0)
      hi = f;
    else
      lo = f;
    const double dp = (3.0 * a * f + 2.0 * nu) * f;
    double next = f - p / dp;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - f) <= 1e-15 * f) return next;
    f = next;
  }
  return f;
}

double cpu_objective(const CpuSubproblem& sub, std::span<const double> cpu_hz) {
  double total = 0.0;
  for (size_t n = 0; n < sub.tasks.size(); ++n) {
    const auto& t = sub.tasks[n];
    const double f = cpu_hz[n];
    total += ((1.0 - t.overhead_factor) / f + t.overhead_factor * sub.energy_coefficient * f * f) * t.cycles();
  }
  return total;
}

CpuSolution optimal_cpu_allocation(const CpuSubproblem& sub) {
  sub.validate();
  const size_t n = sub.tasks.size();
  if (sub.capacity_hz < static_cast<double>(n) * kMinCpuHz)
    throw Infeasible("CPU capacity at node " + std::to_string(sub.receiver) + " cannot cover " +
                     std::to_string(n) + " tasks at the minimum share");

  CpuSolution sol;
  sol.cpu_hz.resize(n);

  double free_total = 0.0;
  for (size_t m = 0; m < n; ++m) {
    sol.cpu_hz[m] = floored(free_optimum(sub.tasks[m], sub.energy_coefficient));
    free_total += sol.cpu_hz[m];
  }
  if (free_total <= sub.capacity_hz) {
    sol.objective = cpu_objective(sub, sol.cpu_hz);
    return sol;
  }

  // Capacity binds: find nu > 0 with total demand equal to the capacity.
  // Above nu_hi every task sits on its floor.
  double hi = 0.0;
  for (const auto& t : sub.tasks) {
    const double c = t.cycles();
    const double nu_floor = (1.0 - t.overhead_factor) * c / (kMinCpuHz * kMinCpuHz) -
                            2.0 * t.overhead_factor * sub.energy_coefficient * c * kMinCpuHz;
    hi = std::max(hi, nu_floor);
  }
  double lo = 0.0;  // demand(lo) > capacity
  double nu = hi;
  const double cap = sub.capacity_hz;
  // Demand is convex and decreasing in nu; Newton from the left never
  // overshoots, bisection (geometric once lo > 0) guards the rest.
  for (int it = 0; it < 300; ++it) {
    const Demand d = demand_at(sub, nu);
    if (std::abs(d.total - cap) <= 1e-13 * cap) break;
    if (d.total > cap)
      lo = nu;
    else
      hi = nu;
    double next = (d.slope < 0.0) ? nu - (d.total - cap) / d.slope : -1.0;
    if (!(next > lo && next < hi)) next = lo > 0.0 ? std::sqrt(lo * hi) : hi * 1e-3;
    if (hi - lo <= 1e-15 * hi) break;
    nu = next;
  }
  // Prefer the feasible side of the bracket.
  if (demand_at(sub, nu).total > cap * (1.0 + 1e-12)) nu = hi;

  sol.multiplier = nu;
  for (size_t m = 0; m < n; ++m) {
    const auto& t = sub.tasks[m];
    sol.cpu_hz[m] = floored(cpu_at_multiplier(t.overhead_factor, sub.energy_coefficient, t.cycles(), nu));
  }
  sol.objective = cpu_objective(sub, sol.cpu_hz);
  return sol;
}

CpuSolution equal_cpu_allocation(const CpuSubproblem& sub) {
  sub.validate();
  CpuSolution sol;
  sol.cpu_hz.assign(sub.tasks.size(), sub.capacity_hz / static_cast<double>(sub.tasks.size()));
  sol.objective = cpu_objective(sub, sol.cpu_hz);
  return sol;
}

CpuSolution solve_cpu(const CpuSubproblem& sub, CpuPolicy policy) {
  return policy == CpuPolicy::kOptimal ? optimal_cpu_allocation(sub) : equal_cpu_allocation(sub);
}

CpuSubproblem make_cpu_subproblem(const NetworkScenario& scenario, int receiver, std::span<const int> tasks) {
  const NodeProfile& host = scenario.nodes[static_cast<size_t>(receiver)];
  CpuSubproblem sub;
  sub.receiver = receiver;
  sub.capacity_hz = host.cpu_hz;
  sub.energy_coefficient = host.energy_coefficient;
  sub.tasks.reserve(tasks.size());
  for (int k : tasks) {
    const NodeProfile& src = scenario.nodes[static_cast<size_t>(k)];
    sub.tasks.push_back({k, src.overhead_factor, src.cycles_per_bit, src.task_bits});
  }
  return sub;
}

double allocate_cpu(AllocationState& alloc, const NetworkScenario& scenario, CpuPolicy policy) {
  double total = 0.0;
  for (int kp = 0; kp < alloc.nodes(); ++kp) {
    const std::vector<int> tasks = alloc.tasks_at(kp);
    if (tasks.empty()) continue;
    const CpuSolution sol = solve_cpu(make_cpu_subproblem(scenario, kp, tasks), policy);
    for (size_t m = 0; m < tasks.size(); ++m) alloc.set_cpu(tasks[m], sol.cpu_hz[m]);
    total += sol.objective;
  }
  return total;
}

}  // namespace d2d
