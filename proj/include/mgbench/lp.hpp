#pragma once

// Self-contained linear programming solver: bounded-variable primal simplex
// with a sparse LU basis factorization and product-form updates. Solves
//   min c.x  s.t.  row_lb <= A x <= row_ub,  col_lb <= x <= col_ub.
// Deterministic: identical inputs produce identical pivot sequences.

#include <cstdint>
#include <span>
#include <vector>

namespace mgbench::lp {

struct Problem {
  std::vector<double> cost, col_lb, col_ub;
  std::vector<double> row_lb, row_ub;
  // Row-wise storage; converted to columns at solve time.
  std::vector<std::vector<std::pair<int, double>>> row_entries;

  std::size_t cols() const { return cost.size(); }
  std::size_t rows() const { return row_lb.size(); }

  int add_col(double c, double lb, double ub);
  int add_row(double lb, double ub, std::span<const int> idx, std::span<const double> val);
};

enum class Status { kOptimal, kInfeasible, kUnbounded, kIterLimit };

struct Options {
  double feas_tol = 1e-9;
  double opt_tol = 1e-9;
  std::int64_t max_iters = 0;  // 0 = automatic from problem size
};

// Snapshot of a simplex basis: per-variable status (structurals then row
// logicals) and the basic variable of each row slot. A solution's basis can
// warm-start a solve of the same problem shape with modified bounds.
struct Basis {
  std::vector<unsigned char> vstat;
  std::vector<int> basic;
  bool empty() const { return basic.empty(); }
};

struct Solution {
  Status status = Status::kIterLimit;
  double objective = 0.0;
  std::vector<double> x;             // structural values
  std::vector<double> row_activity;  // A x
  std::vector<double> y;             // row duals
  std::vector<double> reduced_cost;  // structural reduced costs
  Basis basis;
  std::int64_t iterations = 0;
};

Solution solve(const Problem& p, const Options& opts = {}, const Basis* warm = nullptr);

// Largest bound/row violation of a candidate point; used by tests and by the
// MILP layer to audit returned assignments.
double max_violation(const Problem& p, std::span<const double> x);

}  // namespace mgbench::lp
