#include "helpers.hpp"

#include "mgbench/rng.hpp"

namespace mgbench::testing {

NetloadSeries make_series(std::vector<double> values, std::int64_t start_epoch,
                          std::int64_t step_seconds) {
  NetloadSeries s;
  for (std::size_t i = 0; i < values.size(); ++i)
    s.timestamps.push_back(start_epoch + static_cast<std::int64_t>(i) * step_seconds);
  s.values = std::move(values);
  return s;
}

Tariff flat_tariff(double price, double subscribed, double penalty) {
  Tariff t;
  t.price_per_kwh.fill(price);
  t.subscribed_power = subscribed;
  t.overrun_penalty = penalty;
  return t;
}

SiteConfig simple_site(double capacity, double max_charge_kw, double max_discharge_kw,
                       double eff_c, double eff_d, const Tariff& tariff, double s0) {
  SiteConfig site;
  site.battery = BatteryParams{capacity, max_charge_kw, max_discharge_kw, eff_c, eff_d, s0};
  site.tariff = tariff;
  site.dt_hours = 1.0;
  return site;
}

ScenarioTree random_tree(std::mt19937_64& rng, int depth, int max_children, int max_nodes,
                         double w_lo, double w_hi) {
  ScenarioTree t;
  t.nodes.push_back(TreeNode{-1, 0, uniform_range(rng, w_lo, w_hi), 1.0});
  std::vector<std::int32_t> level{0};
  int budget = max_nodes - 1;
  for (int d = 1; d <= depth; ++d) {
    std::vector<std::int32_t> next;
    const int levels_left = depth - d + 1;
    for (std::size_t i = 0; i < level.size(); ++i) {
      // Keep enough budget for one node per remaining level of every branch.
      const int reserve = static_cast<int>(level.size() - 1 - i + next.size() + 1) *
                          (levels_left - 1);
      const int avail = std::max(1, (budget - reserve) / static_cast<int>(level.size() - i));
      const int kids = 1 + static_cast<int>(uniform_below(
                               rng, static_cast<std::uint64_t>(
                                        std::max(1, std::min(max_children, avail)))));
      std::vector<double> cut(static_cast<std::size_t>(kids));
      double sum = 0.0;
      for (auto& c : cut) {
        c = 0.05 + uniform01(rng);
        sum += c;
      }
      const double parent_prob = t.nodes[static_cast<std::size_t>(level[i])].probability;
      for (int c = 0; c < kids; ++c) {
        t.nodes.push_back(TreeNode{level[i], d, uniform_range(rng, w_lo, w_hi),
                                   parent_prob * cut[static_cast<std::size_t>(c)] / sum});
        next.push_back(static_cast<std::int32_t>(t.nodes.size() - 1));
        --budget;
      }
    }
    level = std::move(next);
  }
  t.validate();
  return t;
}

SiteConfig random_oracle_site(std::mt19937_64& rng, int depth) {
  const double bc = depth >= 4 ? uniform_range(rng, 0.5, 1.2) : uniform_range(rng, 0.5, 3.0);
  const double bd = depth >= 4 ? uniform_range(rng, 0.5, 1.2) : uniform_range(rng, 0.5, 3.0);
  Tariff t;
  for (auto& p : t.price_per_kwh) p = uniform_range(rng, 0.02, 0.3);
  t.subscribed_power = uniform_range(rng, 0.0, 15.0);
  t.overrun_penalty = uniform_range(rng, 0.0, 3.0);
  SiteConfig site;
  site.battery = BatteryParams{uniform_range(rng, 2.0, 12.0),
                               bc,
                               -bd,
                               uniform_range(rng, 0.8, 1.0),
                               uniform_range(rng, 0.8, 1.0),
                               0.0};
  site.tariff = t;
  site.dt_hours = 1.0;
  return site;
}

}  // namespace mgbench::testing
