#pragma once

// Shared fixtures for the test suite.

#include <functional>
#include <random>
#include <vector>

#include "mgbench/core.hpp"
#include "mgbench/tree.hpp"

namespace mgbench::testing {

NetloadSeries make_series(std::vector<double> values, std::int64_t start_epoch = 0,
                          std::int64_t step_seconds = 3600);

// Flat price at every hour.
Tariff flat_tariff(double price, double subscribed, double penalty);

// 1-hour steps, unit efficiencies unless stated.
SiteConfig simple_site(double capacity, double max_charge_kw, double max_discharge_kw,
                       double eff_c, double eff_d, const Tariff& tariff, double s0 = 0.0);

// Random scenario tree with every leaf at `depth` and at most `max_nodes`
// nodes; values uniform in [w_lo, w_hi], child probabilities a random split
// of the parent's.
ScenarioTree random_tree(std::mt19937_64& rng, int depth, int max_children, int max_nodes,
                         double w_lo = -20.0, double w_hi = 20.0);

// Random site for solver cross-checks. Efficiencies in [0.8, 1], subscribed
// power in [0, 15], control bounds shrink with depth so the brute-force grid
// oracle stays tractable.
SiteConfig random_oracle_site(std::mt19937_64& rng, int depth);

class FunctionPolicy final : public Policy {
 public:
  using Fn = std::function<Control(const State&, const History&, const DecisionInput&)>;
  FunctionPolicy(std::string name, Fn fn, bool oracle = false)
      : name_(std::move(name)), fn_(std::move(fn)), oracle_(oracle) {}
  std::string name() const override { return name_; }
  bool needs_future() const override { return oracle_; }
  Control decide(const State& x, const History& h, const DecisionInput& in) override {
    return fn_(x, h, in);
  }

 private:
  std::string name_;
  Fn fn_;
  bool oracle_;
};

}  // namespace mgbench::testing
