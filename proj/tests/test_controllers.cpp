#include <doctest.h>

#include <cmath>
#include <memory>

#include "helpers.hpp"
#include "mgbench/controllers.hpp"
#include "mgbench/rng.hpp"
#include "oracle.hpp"

using namespace mgbench;
using namespace mgbench::testing;

namespace {

// Noisy daily pattern, learnable by the analog sampler.
std::vector<double> patterned(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double hour = static_cast<double>(i % 24);
    v[i] = 10.0 + 6.0 * std::sin(6.2831853 * (hour - 6.0) / 24.0) + uniform_range(rng, -1, 1);
  }
  return v;
}

SamplerConfig tiny_sampler() {
  SamplerConfig c;
  c.lags = 8;
  c.horizon = 6;
  c.neighbors = 5;
  return c;
}

}  // namespace

TEST_CASE("heuristic rule") {
  BatteryParams b{20, 10, -10, 1.0, 1.0, 0.0};
  CHECK(heu_decide(State{0.0}, -5.0, b, 1.0).battery == doctest::Approx(5.0));
  BatteryParams b2{20, 10, -10, 1.0, 1.0, 0.0};
  CHECK(heu_decide(State{2.0}, 8.0, b2, 1.0).battery == doctest::Approx(-2.0));
  CHECK(heu_decide(State{5.0}, 0.0, b2, 1.0).battery == 0.0);
  // Power-limited charge and discharge.
  CHECK(heu_decide(State{0.0}, -25.0, b, 1.0).battery == doctest::Approx(10.0));
  CHECK(heu_decide(State{20.0}, 25.0, b, 1.0).battery == doctest::Approx(-10.0));
  // Room-limited charge with efficiency: room = (cap - s) / eff_c.
  BatteryParams b3{10, 10, -10, 0.5, 1.0, 0.0};
  CHECK(heu_decide(State{9.0}, -30.0, b3, 1.0).battery == doctest::Approx(2.0));
}

TEST_CASE("heuristic: three-step scenario costs nothing") {
  auto series = make_series({-5.0, 0.0, 5.0});
  auto site = simple_site(10, 10, -10, 1.0, 1.0, flat_tariff(0.1, 1e9, 0.0));
  HeuristicPolicy heu(site);
  const auto res = simulate(heu, series, site);
  CHECK(res.total_cost == doctest::Approx(0.0));
  CHECK(res.steps[0].control == doctest::Approx(5.0));
  CHECK(res.steps[1].control == doctest::Approx(0.0));
  CHECK(res.steps[2].control == doctest::Approx(-5.0));
}

TEST_CASE("heuristic controls are always feasible without clamping") {
  std::mt19937_64 rng(14);
  std::vector<double> w(300);
  for (auto& v : w) v = uniform_range(rng, -30, 30);
  auto series = make_series(w);
  auto site = simple_site(7.5, 3, -4, 0.85, 0.9, flat_tariff(0.1, 20, 5));
  HeuristicPolicy heu(site);
  const auto res = simulate(heu, series, site);
  CHECK(res.clamp_events == 0);
}

TEST_CASE("perfect forecast: flat zero future means no action") {
  auto series = make_series(std::vector<double>(30, 0.0));
  auto site = simple_site(10, 5, -5, 0.9, 0.9, flat_tariff(0.1, 10, 1));
  PerfectForecastPolicy pmpc(site, 23);
  const auto res = simulate(pmpc, series, site);
  CHECK(res.total_cost == doctest::Approx(0.0));
  for (const auto& s : res.steps) CHECK(std::abs(s.control) <= 1e-9);
}

TEST_CASE("perfect forecast: two-step arbitrage picks the off-peak charge") {
  Tariff t = flat_tariff(0.102, 1e9, 14.31);
  t.price_per_kwh[1] = 0.153;
  auto site = simple_site(10, 10, -10, 1, 1, t);
  auto series = make_series({0.0, 10.0});
  PerfectForecastPolicy pmpc(site, 23);
  const auto res = simulate(pmpc, series, site);
  CHECK(res.steps[0].control == doctest::Approx(10.0));
  CHECK(res.total_cost == doctest::Approx(1.02));
}

TEST_CASE("perfect forecast beats the heuristic on a deterministic toy") {
  std::mt19937_64 rng(15);
  std::vector<double> w(24);
  for (auto& v : w) v = uniform_range(rng, -8, 12);
  auto series = make_series(w);
  auto site = simple_site(12, 6, -6, 1.0, 1.0, flat_tariff(0.1, 1e9, 0.0));
  HeuristicPolicy heu(site);
  PerfectForecastPolicy pmpc(site, 23);
  CHECK(simulate(pmpc, series, site).total_cost <=
        simulate(heu, series, site).total_cost + 1e-9);
}

TEST_CASE("single-sample degeneracy: all tree methods agree") {
  const auto train = patterned(240, 1);
  const auto model = AnalogModel::fit(std::span<const double>(train), tiny_sampler());
  auto series = make_series(patterned(270, 2));
  auto site = simple_site(12, 5, -5, 0.95, 0.95, flat_tariff(0.12, 18, 2));

  std::vector<std::vector<double>> controls;
  for (TreeMethod m : {TreeMethod::kAveraged, TreeMethod::kFan, TreeMethod::kClusteredFan,
                       TreeMethod::kReduced}) {
    ChallengerConfig cfg;
    cfg.method = m;
    cfg.samples = 1;
    cfg.clusters = 1;
    cfg.sampler = tiny_sampler();
    cfg.seed = 99;
    TreePolicy policy("probe", site, cfg, std::make_shared<AnalogScenarioSampler>(model));
    const auto res = simulate(policy, series, site, 240);
    std::vector<double> u;
    for (const auto& s : res.steps) u.push_back(s.control);
    controls.push_back(std::move(u));
  }
  for (std::size_t m = 1; m < controls.size(); ++m) {
    REQUIRE(controls[m].size() == controls[0].size());
    for (std::size_t i = 0; i < controls[0].size(); ++i)
      CHECK(std::abs(controls[m][i] - controls[0][i]) < 1e-6);
  }
}

TEST_CASE("true-future sampler collapses MPC onto P-MPC") {
  auto series = make_series(patterned(60, 3));
  auto site = simple_site(10, 4, -4, 0.9, 0.9, flat_tariff(0.15, 15, 3));
  ChallengerConfig cfg;
  cfg.method = TreeMethod::kAveraged;
  cfg.samples = 1;
  cfg.sampler = tiny_sampler();
  cfg.sampler.horizon = 12;
  TreePolicy mpc("MPC-oracle", site, cfg, std::make_shared<TrueFutureSampler>());
  PerfectForecastPolicy pmpc(site, 12);
  const auto a = simulate(mpc, series, site, 20);
  const auto b = simulate(pmpc, series, site, 20);
  CHECK(a.total_cost == b.total_cost);  // identical MILP instances, bit for bit
  for (std::size_t i = 0; i < a.steps.size(); ++i)
    CHECK(a.steps[i].control == b.steps[i].control);
}

TEST_CASE("two-branch fan: root control minimizes the expected tail cost") {
  auto site = simple_site(8, 4, -4, 0.9, 0.9, flat_tariff(0.2, 9.0, 2.0));
  ScenarioMatrix m;
  m.rows = 2;
  m.cols = 2;
  m.values = {11.0, -2.0, -7.0, 8.0};
  const auto fan = build_fan(m, 3.0);
  const auto out = solve(build_extensive(fan, 2.0, 6, site));
  REQUIRE(out.status == MilpStatus::kOptimal);
  const auto grid = grid_tree_optimum(fan, 2.0, 6, site);
  const double f_milp = grid_tree_cost_with_root(fan, out.root_control, 2.0, 6, site);
  // The MILP root must be as good as the best grid root, up to resolution.
  const double tol = 0.2 * 0.1 * 2 + 1e-6;
  CHECK(f_milp <= grid.cost + tol);
}

TEST_CASE("fixed seeds reproduce full trajectories bit for bit") {
  const auto train = patterned(240, 4);
  const auto model = AnalogModel::fit(std::span<const double>(train), tiny_sampler());
  auto series = make_series(patterned(280, 5));
  auto site = simple_site(10, 5, -5, 0.9, 0.9, flat_tariff(0.13, 16, 2));
  ChallengerConfig cfg = ChallengerConfig::defaults("2S-SP");
  cfg.samples = 6;
  cfg.sampler = tiny_sampler();
  cfg.seed = 1234;
  auto run = [&] {
    TreePolicy p("2S-SP", site, cfg, std::make_shared<AnalogScenarioSampler>(model));
    return simulate(p, series, site, 240);
  };
  const auto a = run();
  const auto b = run();
  CHECK(a.total_cost == b.total_cost);
  for (std::size_t i = 0; i < a.steps.size(); ++i)
    CHECK(a.steps[i].control == b.steps[i].control);
}

TEST_CASE("factory covers all six algorithms and flags errors") {
  auto site = simple_site(10, 5, -5, 0.9, 0.9, flat_tariff(0.1, 10, 1));
  const auto train = patterned(240, 6);
  const auto model = AnalogModel::fit(std::span<const double>(train), tiny_sampler());
  ChallengerConfig cfg;
  cfg.sampler = tiny_sampler();
  for (const char* name : {"HEU", "P-MPC", "MPC", "SP", "2S-SP", "2S-SP-C"}) {
    auto p = make_policy(name, site, &model, cfg);
    CHECK(p->name() == name);
  }
  CHECK_THROWS_AS(make_policy("SP", site, nullptr, cfg), ConfigError);
  CHECK_THROWS_AS(make_policy("nope", site, &model, cfg), ConfigError);
  CHECK(is_challenger("2S-SP-C"));
  CHECK(!is_challenger("HEU"));
}

TEST_CASE("sampler failures carry the policy identity") {
  auto site = simple_site(10, 5, -5, 0.9, 0.9, flat_tariff(0.1, 10, 1));
  const auto train = patterned(240, 7);
  const auto model = AnalogModel::fit(std::span<const double>(train), tiny_sampler());
  ChallengerConfig cfg;
  cfg.sampler = tiny_sampler();
  TreePolicy p("SP", site, cfg, std::make_shared<AnalogScenarioSampler>(model));
  // History shorter than the lag window.
  auto series = make_series({1.0, 2.0, 3.0, 4.0});
  try {
    simulate(p, series, site);
    FAIL("expected a policy error");
  } catch (const PolicyError& e) {
    CHECK(std::string(e.what()).find("SP") != std::string::npos);
  }
}
