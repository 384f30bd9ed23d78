#pragma once

// Extensive-form MILP over a scenario tree: one block of variables per node
// (charge, discharge, state, import, overrun indicator), battery dynamics on
// the edges, and probability-weighted import costs in the objective. Solved
// exactly by branch-and-bound on the overrun binaries over the bundled
// simplex, or exported in CPLEX LP text format for external cross-checks.

#include <cstdint>
#include <string>
#include <vector>

#include "mgbench/core.hpp"
#include "mgbench/lp.hpp"
#include "mgbench/tree.hpp"

namespace mgbench {

struct ExtensiveProblem {
  ScenarioTree tree;
  SiteConfig site;
  int t0_hour = 0;
  double x0 = 0.0;
  // With strict complementarity, an extra binary per node forbids
  // simultaneous charge and discharge. Off by default: with non-negative
  // prices and unremunerated exports, simultaneous flow is never optimal.
  bool strict = false;

  lp::Problem lp;
  std::vector<double> stage_price;  // per node
  std::vector<double> big_m;        // per node
  std::vector<int> binary_cols;     // z (and complementarity) columns

  int vars_per_node() const { return strict ? 6 : 5; }
  int pc_col(std::size_t n) const { return static_cast<int>(n) * vars_per_node() + 0; }
  int pd_col(std::size_t n) const { return static_cast<int>(n) * vars_per_node() + 1; }
  int x_col(std::size_t n) const { return static_cast<int>(n) * vars_per_node() + 2; }
  int e_col(std::size_t n) const { return static_cast<int>(n) * vars_per_node() + 3; }
  int z_col(std::size_t n) const { return static_cast<int>(n) * vars_per_node() + 4; }
  int y_col(std::size_t n) const { return static_cast<int>(n) * vars_per_node() + 5; }
};

ExtensiveProblem build_extensive(const ScenarioTree& tree, double x0, int t0_hour,
                                 const SiteConfig& site, bool strict = false);

enum class MilpStatus { kOptimal, kTimeLimit, kInfeasible };

struct MilpOptions {
  double time_limit_seconds = 5.0;
  double integrality_tol = 1e-6;
  double gap_tol = 1e-9;
};

struct SolverOutcome {
  MilpStatus status = MilpStatus::kInfeasible;
  double objective = 0.0;
  double root_control = 0.0;       // net battery energy at the root, kWh
  std::vector<double> assignment;  // full variable vector
  std::int64_t lp_iterations = 0;
  int nodes_explored = 0;
};

SolverOutcome solve(const ExtensiveProblem& problem, const MilpOptions& opts = {});

// Objective of an assignment recomputed from the stage-cost definition,
// independent of the LP objective vector.
double recompute_objective(const ExtensiveProblem& problem, std::span<const double> assignment);

// CPLEX LP text format, bit-stable and sorted by node id.
std::string export_lp(const ExtensiveProblem& problem);

}  // namespace mgbench
