#include <chrono>
#include <cstdio>
#include <memory>
#include "helpers.hpp"
#include "mgbench/bench.hpp"
#include "mgbench/controllers.hpp"
#include "mgbench/lp.hpp"
#include "mgbench/rng.hpp"

using namespace mgbench;
using namespace mgbench::testing;

int main() {
  SynthSpec spec; spec.site_index = 2; spec.days = 20; spec.seed = 321;
  auto ds = ingest_raw("s", generate_synthetic_site(spec), 15, ValueUnit::kKwhPerStep, FillPolicy::kNone, 0.6);
  BatteryParams bat{40, 10, -10, 0.95, 0.95, 0.0};
  auto site = derive_site_config(ds, bat, TariffTemplate{});
  std::printf("subscribed=%.2f max_w=%.2f\n", site.tariff.subscribed_power,
              *std::max_element(ds.hourly.values.begin(), ds.hourly.values.end()));
  SamplerConfig sc;
  std::vector<double> train(ds.hourly.values.begin(), ds.hourly.values.begin() + (long)ds.split);
  auto model = AnalogModel::fit(train, sc);
  ChallengerConfig cfg = ChallengerConfig::defaults("2S-SP");
  cfg.sampler = sc; cfg.seed = 5150;
  TreePolicy policy("2S-SP", site, cfg, std::make_shared<AnalogScenarioSampler>(model));

  int step = 0;
  policy.set_inspector([&](std::size_t, const ExtensiveProblem& p) {
    // free binaries after the presolve rule
    const double sub = p.site.tariff.subscribed_power;
    const double bd = -p.site.discharge_bound();
    int free_bins = 0;
    for (std::size_t n = 0; n < p.tree.size(); ++n) {
      const double emax = p.lp.col_ub[(std::size_t)p.e_col(n)];
      const double emin = std::max(0.0, p.tree.nodes[n].value - bd);
      if (emax > sub && emin <= sub) ++free_bins;
    }
    auto t0 = std::chrono::steady_clock::now();
    auto rel = lp::solve(p.lp);
    double lpms = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() * 1e3;
    t0 = std::chrono::steady_clock::now();
    MilpOptions mo; mo.time_limit_seconds = 5.0;
    auto out = solve(p, mo);
    double ms = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() * 1e3;
    std::printf("step %2d: tree=%4zu free_z=%3d rootLP=%9.3f (%lld it, %.0f ms) milp=%9.3f bnb=%4d %8.0f ms status=%d\n",
      step++, p.tree.size(), free_bins, rel.objective, (long long)rel.iterations, lpms,
      out.objective, out.nodes_explored, ms, (int)out.status);
  });
  simulate(policy, ds.hourly, site, ds.split, 4);
  return 0;
}
