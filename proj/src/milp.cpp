#include "mgbench/milp.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <queue>

namespace mgbench {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kBigMMargin = 1e-6;
}  // namespace

ExtensiveProblem build_extensive(const ScenarioTree& tree, double x0, int t0_hour,
                                 const SiteConfig& site, bool strict) {
  tree.validate();
  site.validate();
  if (!(x0 >= 0.0 && x0 <= site.battery.capacity))
    throw ConfigError("build_extensive: x0 outside [0, capacity]");
  if (t0_hour < 0 || t0_hour >= 24) throw ConfigError("build_extensive: bad t0_hour");

  ExtensiveProblem p;
  p.tree = tree;
  p.site = site;
  p.t0_hour = t0_hour;
  p.x0 = x0;
  p.strict = strict;

  const std::size_t N = tree.size();
  const double cap = site.battery.capacity;
  const double bc = site.charge_bound();
  const double bd = -site.discharge_bound();  // positive discharge limit
  const double rc = site.battery.eff_charge;
  const double rd = site.battery.eff_discharge;
  const double sub = site.tariff.subscribed_power;
  const double pen = site.tariff.overrun_penalty;

  p.stage_price.resize(N);
  p.big_m.resize(N);
  for (std::size_t n = 0; n < N; ++n) {
    const auto& node = tree.nodes[n];
    const int hour = (t0_hour + node.depth) % 24;
    p.stage_price[n] = site.tariff.price_per_kwh[static_cast<std::size_t>(hour)];
    p.big_m[n] = std::max(0.0, node.value + bc - sub) + kBigMMargin;

    p.lp.add_col(0.0, 0.0, bc);  // pc
    p.lp.add_col(0.0, 0.0, bd);  // pd
    if (n == 0)
      p.lp.add_col(0.0, x0, x0);  // root state is fixed
    else
      p.lp.add_col(0.0, 0.0, cap);  // x
    p.lp.add_col(node.probability * p.stage_price[n], 0.0,
                 std::max(0.0, node.value + bc));  // e
    p.lp.add_col(node.probability * pen, 0.0, 1.0);  // z
    if (strict) p.lp.add_col(0.0, 0.0, 1.0);         // y
  }

  for (std::size_t n = 0; n < N; ++n) {
    const int idx[3] = {p.e_col(n), p.pc_col(n), p.pd_col(n)};
    const double val[3] = {1.0, -1.0, 1.0};
    p.lp.add_row(tree.nodes[n].value, kInf, idx, val);  // e >= w + pc - pd
  }
  for (std::size_t n = 0; n < N; ++n) {
    const int idx[2] = {p.e_col(n), p.z_col(n)};
    const double val[2] = {1.0, -p.big_m[n]};
    p.lp.add_row(-kInf, sub, idx, val);  // e <= sub + M z
  }
  for (std::size_t n = 1; n < N; ++n) {
    const auto parent = static_cast<std::size_t>(tree.nodes[n].parent);
    const int idx[4] = {p.x_col(n), p.x_col(parent), p.pc_col(parent), p.pd_col(parent)};
    const double val[4] = {1.0, -1.0, -rc, 1.0 / rd};
    p.lp.add_row(0.0, 0.0, idx, val);  // x_n = x_m + rc pc_m - pd_m / rd
  }
  // Leaf-stage controls are stock-limited: the post-horizon state has no
  // terminal value but must stay within the physical bounds.
  {
    std::vector<char> has_child(N, 0);
    for (std::size_t n = 1; n < N; ++n)
      has_child[static_cast<std::size_t>(tree.nodes[n].parent)] = 1;
    for (std::size_t n = 0; n < N; ++n) {
      if (has_child[n]) continue;
      const int idx[3] = {p.x_col(n), p.pc_col(n), p.pd_col(n)};
      const double val[3] = {1.0, rc, -1.0 / rd};
      p.lp.add_row(0.0, cap, idx, val);  // 0 <= x_n + rc pc_n - pd_n / rd <= cap
    }
  }
  if (strict) {
    for (std::size_t n = 0; n < N; ++n) {
      const int ci[2] = {p.pc_col(n), p.y_col(n)};
      const double cv[2] = {1.0, -bc};
      p.lp.add_row(-kInf, 0.0, ci, cv);  // pc <= bc y
      const int di[2] = {p.pd_col(n), p.y_col(n)};
      const double dv[2] = {1.0, bd};
      p.lp.add_row(-kInf, bd, di, dv);  // pd <= bd (1 - y)
    }
  }

  for (std::size_t n = 0; n < N; ++n) p.binary_cols.push_back(p.z_col(n));
  if (strict)
    for (std::size_t n = 0; n < N; ++n) p.binary_cols.push_back(p.y_col(n));
  return p;
}

double recompute_objective(const ExtensiveProblem& p, std::span<const double> a) {
  double total = 0.0;
  for (std::size_t n = 0; n < p.tree.size(); ++n) {
    const double e = a[static_cast<std::size_t>(p.e_col(n))];
    double c = p.stage_price[n] * e;
    if (e > p.site.tariff.subscribed_power) c += p.site.tariff.overrun_penalty;
    total += p.tree.nodes[n].probability * c;
  }
  return total;
}

namespace {

double cost_dot(const lp::Problem& lp, const std::vector<double>& x) {
  double s = 0.0;
  for (std::size_t j = 0; j < lp.cols(); ++j) s += lp.cost[j] * x[j];
  return s;
}

// Feasible completion for the original problem: each overrun binary follows
// its import indicator (branch fixes are a search device, not a constraint of
// the original model). Returns false when a strict-mode row cannot be
// satisfied by any binary choice.
bool round_completion(const ExtensiveProblem& p, std::vector<double>& x) {
  const double sub = p.site.tariff.subscribed_power;
  const std::size_t N = p.tree.size();
  for (std::size_t n = 0; n < N; ++n) {
    const double e = x[static_cast<std::size_t>(p.e_col(n))];
    x[static_cast<std::size_t>(p.z_col(n))] = e > sub ? 1.0 : 0.0;
  }
  if (p.strict) {
    const double bc = p.site.charge_bound();
    const double bd = -p.site.discharge_bound();
    for (std::size_t n = 0; n < N; ++n) {
      const double pc = x[static_cast<std::size_t>(p.pc_col(n))];
      const double pd = x[static_cast<std::size_t>(p.pd_col(n))];
      const double y = pc > 1e-9 ? 1.0 : 0.0;
      if (pc > bc * y + 1e-9 || pd > bd * (1.0 - y) + 1e-9) return false;
      x[static_cast<std::size_t>(p.y_col(n))] = y;
    }
  }
  return true;
}

}  // namespace

SolverOutcome solve(const ExtensiveProblem& problem, const MilpOptions& opts) {
  const auto deadline =
      std::chrono::steady_clock::now() +
      std::chrono::duration_cast<std::chrono::steady_clock::duration>(
          std::chrono::duration<double>(opts.time_limit_seconds));
  const std::size_t nbin = problem.binary_cols.size();

  SolverOutcome out;
  out.status = MilpStatus::kInfeasible;

  // Always-feasible starting incumbent: idle battery, import the netload.
  {
    std::vector<double> x(problem.lp.cols(), 0.0);
    for (std::size_t n = 0; n < problem.tree.size(); ++n) {
      x[static_cast<std::size_t>(problem.x_col(n))] = problem.x0;
      const double e = std::max(0.0, problem.tree.nodes[n].value);
      x[static_cast<std::size_t>(problem.e_col(n))] = e;
      x[static_cast<std::size_t>(problem.z_col(n))] =
          e > problem.site.tariff.subscribed_power ? 1.0 : 0.0;
    }
    out.assignment = std::move(x);
    out.objective = cost_dot(problem.lp, out.assignment);
    out.status = MilpStatus::kOptimal;  // refined below
  }

  // Presolve the overrun binaries that are not a real choice: z = 0 when the
  // largest possible import stays within the subscription, z = 1 when even a
  // full-power discharge cannot avoid exceeding it.
  std::vector<int8_t> root_fix(nbin, -1);
  {
    const double sub = problem.site.tariff.subscribed_power;
    const double bd = -problem.site.discharge_bound();
    for (std::size_t n = 0; n < problem.tree.size(); ++n) {
      const double emax = problem.lp.col_ub[static_cast<std::size_t>(problem.e_col(n))];
      const double emin = std::max(0.0, problem.tree.nodes[n].value - bd);
      if (emax <= sub)
        root_fix[n] = 0;
      else if (emin > sub)
        root_fix[n] = 1;
    }
  }

  struct Node {
    double bound;
    int id;
    std::vector<int8_t> fixed;
    std::shared_ptr<const lp::Basis> warm;  // parent's optimal basis
  };
  struct Cmp {
    bool operator()(const Node& a, const Node& b) const {
      if (a.bound != b.bound) return a.bound > b.bound;
      return a.id > b.id;
    }
  };
  std::priority_queue<Node, std::vector<Node>, Cmp> open;
  int next_id = 0;
  open.push({-kInf, next_id++, std::move(root_fix), nullptr});

  lp::Problem work = problem.lp;
  bool timed_out = false;
  bool root_infeasible = false;

  while (!open.empty()) {
    if (std::chrono::steady_clock::now() > deadline) {
      timed_out = true;
      break;
    }
    Node node = open.top();
    open.pop();
    if (node.bound >= out.objective - opts.gap_tol) continue;

    for (std::size_t b = 0; b < nbin; ++b) {
      const int col = problem.binary_cols[b];
      if (node.fixed[b] < 0) {
        work.col_lb[static_cast<std::size_t>(col)] = 0.0;
        work.col_ub[static_cast<std::size_t>(col)] = 1.0;
      } else {
        work.col_lb[static_cast<std::size_t>(col)] = node.fixed[b];
        work.col_ub[static_cast<std::size_t>(col)] = node.fixed[b];
      }
    }
    const lp::Solution rel = lp::solve(work);
    ++out.nodes_explored;
    out.lp_iterations += rel.iterations;
    if (rel.status == lp::Status::kInfeasible) {
      if (node.id == 0) root_infeasible = true;
      continue;
    }
    if (rel.status != lp::Status::kOptimal)
      throw SolveError("milp: LP relaxation did not solve to optimality");
    if (rel.objective >= out.objective - opts.gap_tol) continue;

    // Most fractional free binary, lowest index on ties.
    std::size_t branch = nbin;
    double best_frac = opts.integrality_tol;
    for (std::size_t b = 0; b < nbin; ++b) {
      if (node.fixed[b] >= 0) continue;
      const double v = rel.x[static_cast<std::size_t>(problem.binary_cols[b])];
      const double frac = std::min(v, 1.0 - v);
      if (frac > best_frac) {
        best_frac = frac;
        branch = b;
      }
    }

    // Any relaxation point yields an original-problem incumbent by setting
    // the binaries from their indicators; when the relaxation is already
    // integral this recovers it (modulo dominated forced binaries).
    {
      std::vector<double> x = rel.x;
      if (round_completion(problem, x)) {
        const double value = cost_dot(problem.lp, x);
        if (value < out.objective - opts.gap_tol) {
          out.objective = value;
          out.assignment = std::move(x);
        }
      }
    }
    if (branch == nbin) continue;  // integral relaxation: nothing to branch on

    for (int v = 0; v <= 1; ++v) {
      Node child;
      child.bound = rel.objective;
      child.id = next_id++;
      child.fixed = node.fixed;
      child.fixed[branch] = static_cast<int8_t>(v);
      open.push(std::move(child));
    }
  }

  if (root_infeasible) {
    out.status = MilpStatus::kInfeasible;
    return out;
  }
  out.status = timed_out ? MilpStatus::kTimeLimit : MilpStatus::kOptimal;
  out.root_control = out.assignment[static_cast<std::size_t>(problem.pc_col(0))] -
                     out.assignment[static_cast<std::size_t>(problem.pd_col(0))];

  // Audit the returned assignment against the model and the stage-cost
  // definition before handing it to a controller.
  if (lp::max_violation(problem.lp, out.assignment) > 1e-6)
    throw SolveError("milp: returned assignment violates constraints beyond tolerance");
  if (std::abs(recompute_objective(problem, out.assignment) - out.objective) > 1e-6)
    throw SolveError("milp: objective does not match recomputed stage costs");
  return out;
}

namespace {

std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// One objective/constraint term with an explicit sign, e.g. " + 0.102 e_3".
void term(std::string& s, double coef, const std::string& var, bool first = false) {
  if (coef < 0) {
    s += first ? "- " : " - ";
    s += fmt(-coef);
  } else {
    s += first ? "" : " + ";
    s += fmt(coef);
  }
  s += ' ';
  s += var;
}

}  // namespace

std::string export_lp(const ExtensiveProblem& p) {
  const std::size_t N = p.tree.size();
  std::string s;
  s += "\\ extensive-form battery dispatch over a scenario tree\n";
  s += "Minimize\n obj:";
  {
    std::string body;
    bool first = true;
    for (std::size_t n = 0; n < N; ++n) {
      term(body, p.tree.nodes[n].probability * p.stage_price[n], "e_" + std::to_string(n), first);
      first = false;
      term(body, p.tree.nodes[n].probability * p.site.tariff.overrun_penalty,
           "z_" + std::to_string(n));
    }
    s += ' ';
    s += body;
    s += '\n';
  }
  s += "Subject To\n";
  for (std::size_t n = 0; n < N; ++n) {
    std::string body;
    term(body, 1.0, "e_" + std::to_string(n), true);
    term(body, -1.0, "pc_" + std::to_string(n));
    term(body, 1.0, "pd_" + std::to_string(n));
    s += " imp_" + std::to_string(n) + ": " + body + " >= " + fmt(p.tree.nodes[n].value) + "\n";
  }
  for (std::size_t n = 0; n < N; ++n) {
    std::string body;
    term(body, 1.0, "e_" + std::to_string(n), true);
    term(body, -p.big_m[n], "z_" + std::to_string(n));
    s += " ovr_" + std::to_string(n) + ": " + body +
         " <= " + fmt(p.site.tariff.subscribed_power) + "\n";
  }
  const double rc = p.site.battery.eff_charge;
  const double rd = p.site.battery.eff_discharge;
  for (std::size_t n = 1; n < N; ++n) {
    const auto m = static_cast<std::size_t>(p.tree.nodes[n].parent);
    std::string body;
    term(body, 1.0, "x_" + std::to_string(n), true);
    term(body, -1.0, "x_" + std::to_string(m));
    term(body, -rc, "pc_" + std::to_string(m));
    term(body, 1.0 / rd, "pd_" + std::to_string(m));
    s += " dyn_" + std::to_string(n) + ": " + body + " = 0\n";
  }
  {
    std::vector<char> has_child(N, 0);
    for (std::size_t n = 1; n < N; ++n)
      has_child[static_cast<std::size_t>(p.tree.nodes[n].parent)] = 1;
    for (std::size_t n = 0; n < N; ++n) {
      if (has_child[n]) continue;
      std::string lo;
      term(lo, 1.0, "x_" + std::to_string(n), true);
      term(lo, rc, "pc_" + std::to_string(n));
      term(lo, -1.0 / rd, "pd_" + std::to_string(n));
      s += " post_lo_" + std::to_string(n) + ": " + lo + " >= 0\n";
      s += " post_hi_" + std::to_string(n) + ": " + lo +
           " <= " + fmt(p.site.battery.capacity) + "\n";
    }
  }
  if (p.strict) {
    const double bc = p.site.charge_bound();
    const double bd = -p.site.discharge_bound();
    for (std::size_t n = 0; n < N; ++n) {
      std::string body;
      term(body, 1.0, "pc_" + std::to_string(n), true);
      term(body, -bc, "y_" + std::to_string(n));
      s += " cpl_c_" + std::to_string(n) + ": " + body + " <= 0\n";
      std::string body2;
      term(body2, 1.0, "pd_" + std::to_string(n), true);
      term(body2, bd, "y_" + std::to_string(n));
      s += " cpl_d_" + std::to_string(n) + ": " + body2 + " <= " + fmt(bd) + "\n";
    }
  }
  s += "Bounds\n";
  for (std::size_t n = 0; n < N; ++n) {
    s += " 0 <= pc_" + std::to_string(n) + " <= " + fmt(p.site.charge_bound()) + "\n";
    s += " 0 <= pd_" + std::to_string(n) + " <= " + fmt(-p.site.discharge_bound()) + "\n";
    if (n == 0)
      s += " x_0 = " + fmt(p.x0) + "\n";
    else
      s += " 0 <= x_" + std::to_string(n) + " <= " + fmt(p.site.battery.capacity) + "\n";
    s += " 0 <= e_" + std::to_string(n) + " <= " +
         fmt(p.lp.col_ub[static_cast<std::size_t>(p.e_col(n))]) + "\n";
  }
  s += "Binaries\n";
  for (std::size_t n = 0; n < N; ++n) s += " z_" + std::to_string(n);
  s += "\n";
  if (p.strict) {
    for (std::size_t n = 0; n < N; ++n) s += " y_" + std::to_string(n);
    s += "\n";
  }
  s += "End\n";
  return s;
}

}  // namespace mgbench
