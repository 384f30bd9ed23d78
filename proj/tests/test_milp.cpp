#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "mgbench/milp.hpp"
#include "mgbench/rng.hpp"
#include "oracle.hpp"

using namespace mgbench;
using namespace mgbench::testing;

namespace {

ScenarioTree chain(std::vector<double> values) {
  ScenarioTree t;
  t.nodes.push_back(TreeNode{-1, 0, values[0], 1.0});
  for (std::size_t i = 1; i < values.size(); ++i)
    t.nodes.push_back(
        TreeNode{static_cast<std::int32_t>(i - 1), static_cast<std::int32_t>(i), values[i], 1.0});
  return t;
}

double max_price(const Tariff& t) {
  double m = 0.0;
  for (double p : t.price_per_kwh) m = std::max(m, p);
  return m;
}

}  // namespace

TEST_CASE("extensive form: variable and constraint counts") {
  auto site = simple_site(10, 10, -10, 1, 1, flat_tariff(0.1, 60, 14.31));
  const auto single = build_extensive(chain({10.0}), 0.0, 0, site);
  CHECK(single.lp.cols() == 5);
  CHECK(single.lp.rows() == 3);  // import + overrun + post-horizon bound

  std::mt19937_64 rng(4);
  const auto tree = random_tree(rng, 3, 3, 25);
  const auto p = build_extensive(tree, 0.0, 7, site);
  std::size_t leaves = 0;
  const auto kids = tree.children();
  for (std::size_t i = 0; i < tree.size(); ++i) leaves += kids[i].empty();
  CHECK(p.lp.cols() == 5 * tree.size());
  CHECK(p.lp.rows() == 2 * tree.size() + (tree.size() - 1) + leaves);
}

TEST_CASE("single node: battery action cannot pay off") {
  auto site = simple_site(10, 10, -10, 1, 1, flat_tariff(0.102, 60, 14.31));
  const auto p = build_extensive(chain({10.0}), 0.0, 0, site);
  const auto out = solve(p);
  REQUIRE(out.status == MilpStatus::kOptimal);
  const auto oracle = grid_tree_optimum(p.tree, 0.0, 0, site);
  CHECK(std::abs(out.objective - oracle.cost) <= max_price(site.tariff) * 0.1 + 1e-6);
  CHECK(out.assignment[static_cast<std::size_t>(p.e_col(0))] == doctest::Approx(10.0));
  CHECK(out.objective == doctest::Approx(1.02));
}

TEST_CASE("two-step chain: charge off-peak, discharge on-peak") {
  Tariff t = flat_tariff(0.102, 1e9, 14.31);
  t.price_per_kwh[1] = 0.153;
  auto site = simple_site(10, 10, -10, 1, 1, t);
  const auto p = build_extensive(chain({0.0, 10.0}), 0.0, 0, site);
  const auto out = solve(p);
  REQUIRE(out.status == MilpStatus::kOptimal);
  CHECK(out.objective == doctest::Approx(1.02));
  CHECK(out.root_control == doctest::Approx(10.0));
  const auto oracle = grid_tree_optimum(p.tree, 0.0, 0, site);
  CHECK(std::abs(out.objective - oracle.cost) <= max_price(t) * 0.1 * 1 + 1e-6);
}

TEST_CASE("fan couples branches through the root decision") {
  ScenarioMatrix m;
  m.rows = 2;
  m.cols = 2;
  m.values = {12.0, -3.0, -6.0, 9.0};
  auto site = simple_site(6, 4, -4, 0.9, 0.9, flat_tariff(0.2, 8.0, 1.5));
  const auto fan = build_fan(m, 2.0);
  const auto out = solve(build_extensive(fan, 1.0, 3, site));
  REQUIRE(out.status == MilpStatus::kOptimal);
  // Optimizing each branch separately relaxes the root coupling, so the fan
  // optimum cannot be cheaper than the probability mix of branch optima.
  double decoupled = 0.0;
  for (std::size_t r = 0; r < 2; ++r) {
    ScenarioTree branch = chain({2.0, m.at(r, 0), m.at(r, 1)});
    ScenarioTree half = branch;
    for (std::size_t i = 0; i < half.nodes.size(); ++i) half.nodes[i].probability = 1.0;
    const auto bout = solve(build_extensive(half, 1.0, 3, site));
    REQUIRE(bout.status == MilpStatus::kOptimal);
    decoupled += 0.5 * bout.objective;
  }
  // The root stage is shared: the fan counts it once, the mix counts it once
  // per branch with the same value, so the comparison stands.
  CHECK(out.objective >= decoupled - 1e-9);
}

TEST_CASE("no overrun possible: solved at the root relaxation") {
  auto site = simple_site(10, 5, -5, 1, 1, flat_tariff(0.1, 30.0, 14.31));
  std::mt19937_64 rng(6);
  const auto tree = random_tree(rng, 2, 3, 12, -10.0, 10.0);  // w + bc <= 15 < 30
  const auto p = build_extensive(tree, 2.0, 0, site);
  const auto out = solve(p);
  REQUIRE(out.status == MilpStatus::kOptimal);
  CHECK(out.nodes_explored == 1);
  for (std::size_t n = 0; n < tree.size(); ++n)
    CHECK(out.assignment[static_cast<std::size_t>(p.z_col(n))] == 0.0);
}

TEST_CASE("import inequality is tight at positive prices") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const int depth = 1 + static_cast<int>(uniform_below(rng, 3));
    auto site = random_oracle_site(rng, depth);
    const auto tree = random_tree(rng, depth, 3, 20);
    const double x0 = uniform_range(rng, 0, site.battery.capacity);
    const auto p = build_extensive(tree, x0, static_cast<int>(uniform_below(rng, 24)), site);
    const auto out = solve(p);
    REQUIRE(out.status == MilpStatus::kOptimal);
    for (std::size_t n = 0; n < tree.size(); ++n) {
      const double e = out.assignment[static_cast<std::size_t>(p.e_col(n))];
      const double pc = out.assignment[static_cast<std::size_t>(p.pc_col(n))];
      const double pd = out.assignment[static_cast<std::size_t>(p.pd_col(n))];
      if (tree.nodes[n].probability > 1e-12) {
        const double tight = std::max(0.0, tree.nodes[n].value + pc - pd);
        CHECK(std::abs(e - tight) <= 1e-6);
      }
    }
  }
}

TEST_CASE("grid-oracle equivalence on random trees") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 40; ++trial) {
    const int depth = 1 + static_cast<int>(uniform_below(rng, 3));
    auto site = random_oracle_site(rng, depth);
    const auto tree = random_tree(rng, depth, 4, 30);
    const double x0 = uniform_range(rng, 0, site.battery.capacity);
    const int hour = static_cast<int>(uniform_below(rng, 24));
    const auto out = solve(build_extensive(tree, x0, hour, site));
    REQUIRE(out.status == MilpStatus::kOptimal);
    const auto oracle = grid_tree_optimum(tree, x0, hour, site);
    const double tol = max_price(site.tariff) * 0.1 * depth + 1e-6;
    CHECK(out.objective <= oracle.cost + 1e-6);  // the grid restricts the controls
    CHECK(std::abs(out.objective - oracle.cost) <= tol);
  }
}

TEST_CASE("strict complementarity mode matches the default model") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const int depth = 1 + static_cast<int>(uniform_below(rng, 2));
    auto site = random_oracle_site(rng, depth);
    const auto tree = random_tree(rng, depth, 3, 15);
    const double x0 = uniform_range(rng, 0, site.battery.capacity);
    const auto a = solve(build_extensive(tree, x0, 5, site, false));
    const auto b = solve(build_extensive(tree, x0, 5, site, true));
    REQUIRE(a.status == MilpStatus::kOptimal);
    REQUIRE(b.status == MilpStatus::kOptimal);
    CHECK(a.objective == doctest::Approx(b.objective).epsilon(1e-7));
  }
}

TEST_CASE("objective scales linearly with the cost vector") {
  std::mt19937_64 rng(10);
  auto site = random_oracle_site(rng, 2);
  const auto tree = random_tree(rng, 2, 3, 12);
  auto p = build_extensive(tree, 1.0, 2, site);
  const auto base = solve(p);
  // Scale the LP costs directly; argmin controls must not move.
  for (auto& c : p.lp.cost) c *= 3.0;
  for (auto& node : p.tree.nodes) node.probability *= 3.0;  // keep the audit consistent
  const auto scaled = solve(p);
  CHECK(scaled.root_control == doctest::Approx(base.root_control).epsilon(1e-9));
  CHECK(scaled.objective == doctest::Approx(3.0 * base.objective).epsilon(1e-9));
}

TEST_CASE("deterministic solves") {
  std::mt19937_64 rng(11);
  auto site = random_oracle_site(rng, 3);
  const auto tree = random_tree(rng, 3, 3, 24);
  const auto p = build_extensive(tree, 0.5, 13, site);
  const auto a = solve(p);
  const auto b = solve(p);
  CHECK(a.objective == b.objective);
  CHECK(a.root_control == b.root_control);
  CHECK(a.nodes_explored == b.nodes_explored);
  for (std::size_t j = 0; j < a.assignment.size(); ++j)
    CHECK(a.assignment[j] == b.assignment[j]);
}

TEST_CASE("LP text export") {
  auto site = simple_site(10, 10, -10, 0.9, 0.8, flat_tariff(0.102, 60, 14.31));
  const auto p = build_extensive(chain({10.0}), 5.0, 0, site);
  const auto text = export_lp(p);
  CHECK(text == export_lp(p));  // byte-stable
  CHECK(text.find("Minimize") != std::string::npos);
  CHECK(text.find("imp_0:") != std::string::npos);
  CHECK(text.find("ovr_0:") != std::string::npos);
  CHECK(text.find("x_0 = 5") != std::string::npos);
  CHECK(text.find("Binaries") != std::string::npos);
  CHECK(text.find("pc_0") != std::string::npos);
  CHECK(text.find("pd_0") != std::string::npos);
  CHECK(text.find("e_0") != std::string::npos);
  CHECK(text.find("z_0") != std::string::npos);
  CHECK(text.find("dyn_") == std::string::npos);  // no edges on a single node
  CHECK(text.find("post_lo_0") != std::string::npos);

  const auto deep = build_extensive(chain({1.0, 2.0, 3.0}), 0.0, 23, site);
  const auto dtext = export_lp(deep);
  CHECK(dtext.find("dyn_1:") != std::string::npos);
  CHECK(dtext.find("dyn_2:") != std::string::npos);
}

TEST_CASE("valid inputs always admit a solution") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 25; ++trial) {
    const int depth = 1 + static_cast<int>(uniform_below(rng, 3));
    auto site = random_oracle_site(rng, depth);
    const auto tree = random_tree(rng, depth, 3, 18);
    const double x0 = uniform_range(rng, 0, site.battery.capacity);
    const auto out = solve(build_extensive(tree, x0, 0, site));
    CHECK(out.status == MilpStatus::kOptimal);
  }
}
