#include "oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace mgbench::testing {

namespace {

struct Ctx {
  const ScenarioTree* tree;
  const SiteConfig* site;
  std::vector<std::vector<std::int32_t>> kids;
  int t0_hour;
  double grid;
};

std::vector<double> candidates(const Ctx& c, std::size_t n, double soc) {
  // Controls are stock-limited at every stage, leaves included: the next
  // state must stay within [0, capacity] even past the horizon.
  const auto& bat = c.site->battery;
  const double lo = std::max(c.site->discharge_bound(), -bat.eff_discharge * soc);
  const double hi = std::min(c.site->charge_bound(), (bat.capacity - soc) / bat.eff_charge);
  std::vector<double> out;
  for (double v = lo; v < hi; v += c.grid) out.push_back(v);
  out.push_back(hi);
  if (lo < 0.0 && hi > 0.0) out.push_back(0.0);
  const double boundary = c.site->tariff.subscribed_power - c.tree->nodes[n].value;
  if (boundary > lo && boundary < hi) out.push_back(boundary);
  return out;
}

double value(const Ctx& c, std::size_t n, double soc) {
  const auto& node = c.tree->nodes[n];
  const int hour = (c.t0_hour + node.depth) % 24;
  double best = std::numeric_limits<double>::infinity();
  for (double pb : candidates(c, n, soc)) {
    const double e = grid_import(node.value, pb);
    double total = node.probability * stage_cost(e, hour, c.site->tariff);
    if (!c.kids[n].empty()) {
      double next = step_dynamics(soc, pb, c.site->battery);
      next = std::clamp(next, 0.0, c.site->battery.capacity);
      for (auto k : c.kids[n]) total += value(c, static_cast<std::size_t>(k), next);
    }
    best = std::min(best, total);
  }
  return best;
}

}  // namespace

GridResult grid_tree_optimum(const ScenarioTree& tree, double x0, int t0_hour,
                             const SiteConfig& site, double grid) {
  Ctx c{&tree, &site, tree.children(), t0_hour, grid};
  const auto& root = tree.nodes[0];
  GridResult best;
  best.cost = std::numeric_limits<double>::infinity();
  for (double pb : candidates(c, 0, x0)) {
    const double e = grid_import(root.value, pb);
    double total = root.probability * stage_cost(e, t0_hour, site.tariff);
    if (!c.kids[0].empty()) {
      double next = step_dynamics(x0, pb, site.battery);
      next = std::clamp(next, 0.0, site.battery.capacity);
      for (auto k : c.kids[0]) total += value(c, static_cast<std::size_t>(k), next);
    }
    if (total < best.cost) {
      best.cost = total;
      best.root_control = pb;
    }
  }
  return best;
}

double grid_tree_cost_with_root(const ScenarioTree& tree, double root_control, double x0,
                                int t0_hour, const SiteConfig& site, double grid) {
  Ctx c{&tree, &site, tree.children(), t0_hour, grid};
  const auto& root = tree.nodes[0];
  const double e = grid_import(root.value, root_control);
  double total = root.probability * stage_cost(e, t0_hour, site.tariff);
  if (!c.kids[0].empty()) {
    double next = step_dynamics(x0, root_control, site.battery);
    next = std::clamp(next, 0.0, site.battery.capacity);
    for (auto k : c.kids[0]) total += value(c, static_cast<std::size_t>(k), next);
  }
  return total;
}

}  // namespace mgbench::testing
