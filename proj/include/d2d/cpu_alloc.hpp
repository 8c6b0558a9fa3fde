#pragma once

#include <span>
#include <vector>

#include "d2d/scenario.hpp"
#include "d2d/state.hpp"

namespace d2d {

// Floor for the CPU share of an assigned task. A zero share would never
// complete the task; energy-only tasks (beta = 1) sit exactly on the floor.
inline constexpr double kMinCpuHz = 1e3;

struct CpuTask {
  int task = 0;
  double overhead_factor = 0.0;  // beta_k
  double cycles_per_bit = 0.0;   // mu_k
  double task_bits = 0.0;        // I_k
  double cycles() const { return cycles_per_bit * task_bits; }
};

// CPU sharing problem at one receiver: minimise
//   sum_k ((1 - beta_k) / F_k + beta_k kappa F_k^2) mu_k I_k
// subject to sum_k F_k <= capacity, F_k >= kMinCpuHz.
struct CpuSubproblem {
  int receiver = 0;
  double capacity_hz = 0.0;
  double energy_coefficient = 0.0;  // kappa of the receiver
  std::vector<CpuTask> tasks;

  void validate() const;
};

struct CpuSolution {
  std::vector<double> cpu_hz;  // parallel to CpuSubproblem::tasks
  double multiplier = 0.0;     // capacity dual; 0 when the capacity is slack
  double objective = 0.0;
};

enum class CpuPolicy { kOptimal, kEqual };

// Minimiser of (1 - beta)/F + beta kappa F^2 for 0 < beta < 1.
double unconstrained_cpu_min(double beta, double kappa);

// Positive root of 2 beta kappa c F^3 + nu F^2 - (1 - beta) c = 0 with c = mu I;
// +inf for beta = 0 and nu = 0.
double cpu_at_multiplier(double beta, double kappa, double cycles, double nu);

double cpu_objective(const CpuSubproblem& sub, std::span<const double> cpu_hz);

// Exact solution via the KKT system. Throws Infeasible when the capacity
// cannot cover the floor of every task.
CpuSolution optimal_cpu_allocation(const CpuSubproblem& sub);

CpuSolution equal_cpu_allocation(const CpuSubproblem& sub);

CpuSolution solve_cpu(const CpuSubproblem& sub, CpuPolicy policy);

CpuSubproblem make_cpu_subproblem(const NetworkScenario& scenario, int receiver, std::span<const int> tasks);

// Optimal (or equal) CPU shares at every node for the task assignment held in
// `alloc`; writes F into `alloc` and returns the summed computation overhead.
double allocate_cpu(AllocationState& alloc, const NetworkScenario& scenario, CpuPolicy policy);

}  // namespace d2d
