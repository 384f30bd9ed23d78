#include "mgbench/controllers.hpp"

#include <algorithm>
#include <cmath>

#include "mgbench/rng.hpp"

namespace mgbench {

ChallengerConfig ChallengerConfig::defaults(const std::string& algorithm) {
  ChallengerConfig cfg;
  if (algorithm == "MPC") {
    cfg.method = TreeMethod::kAveraged;
    cfg.samples = 50;
  } else if (algorithm == "SP") {
    cfg.method = TreeMethod::kReduced;
    cfg.samples = 50;
    cfg.eps_construction = 0.2;
    cfg.eps_reduction = 0.0;
  } else if (algorithm == "2S-SP") {
    cfg.method = TreeMethod::kFan;
    cfg.samples = 20;
  } else if (algorithm == "2S-SP-C") {
    cfg.method = TreeMethod::kClusteredFan;
    cfg.samples = 100;
    cfg.clusters = 20;
  } else {
    throw ConfigError("no challenger defaults for algorithm '" + algorithm + "'");
  }
  return cfg;
}

ScenarioMatrix AnalogScenarioSampler::draw(const History& h, const DecisionInput&,
                                           std::size_t count, std::size_t horizon,
                                           std::uint64_t seed) const {
  return model_.sample(h, count, horizon, seed);
}

ScenarioMatrix TrueFutureSampler::draw(const History&, const DecisionInput& in, std::size_t count,
                                       std::size_t horizon, std::uint64_t) const {
  if (in.true_future.size() < horizon)
    throw PolicyError("true-future sampler: requested horizon longer than provided future");
  ScenarioMatrix m;
  m.rows = count;
  m.cols = horizon;
  m.values.resize(count * horizon);
  for (std::size_t r = 0; r < count; ++r)
    for (std::size_t c = 0; c < horizon; ++c) m.values[r * horizon + c] = in.true_future[c];
  return m;
}

Control heu_decide(const State& x, double netload, const BatteryParams& battery,
                   double dt_hours) {
  if (netload < 0.0) {
    const double room = (battery.capacity - x.soc) / battery.eff_charge;
    return Control{std::min({-netload, battery.max_charge * dt_hours, room})};
  }
  if (netload > 0.0) {
    const double stock = battery.eff_discharge * x.soc;
    return Control{-std::min({netload, -battery.max_discharge * dt_hours, stock})};
  }
  return Control{0.0};
}

Control HeuristicPolicy::decide(const State& x, const History& h, const DecisionInput&) {
  return heu_decide(x, h.last(), site_.battery, site_.dt_hours);
}

namespace {

Control solve_tree_control(const ScenarioTree& tree, const State& x, const DecisionInput& in,
                           const SiteConfig& site, const MilpOptions& milp,
                           const ProblemInspector& inspect) {
  const ExtensiveProblem problem = build_extensive(tree, x.soc, in.hour_of_day, site);
  if (inspect) inspect(in.step, problem);
  const SolverOutcome outcome = solve(problem, milp);
  if (outcome.status == MilpStatus::kInfeasible)
    throw SolveError("tree policy: extensive problem reported infeasible");
  return Control{outcome.root_control};
}

}  // namespace

Control PerfectForecastPolicy::decide(const State& x, const History& h, const DecisionInput& in) {
  const std::size_t r = std::min(horizon_, in.true_future.size());
  ScenarioMatrix m;
  m.rows = 1;
  m.cols = r;
  m.values.assign(in.true_future.begin(), in.true_future.begin() + static_cast<std::ptrdiff_t>(r));
  const ScenarioTree tree =
      r == 0 ? ScenarioTree{{TreeNode{-1, 0, h.last(), 1.0}}} : build_fan(m, h.last());
  return solve_tree_control(tree, x, in, site_, milp_, inspect_);
}

Control TreePolicy::decide(const State& x, const History& h, const DecisionInput& in) {
  const std::size_t r = std::min(cfg_.sampler.horizon, in.steps_remaining);
  ScenarioTree tree;
  if (r == 0) {
    tree.nodes.push_back(TreeNode{-1, 0, h.last(), 1.0});
  } else {
    const std::uint64_t step_seed = derive_seed(cfg_.seed, in.step);
    ScenarioMatrix samples;
    try {
      samples = sampler_->draw(h, in, cfg_.samples, r, step_seed);
    } catch (const Error& e) {
      throw PolicyError(name_ + ": sampler failed at step " + std::to_string(in.step) + ": " +
                        e.what());
    }
    const double root = h.last();
    switch (cfg_.method) {
      case TreeMethod::kAveraged:
        tree = average_branch(samples, root);
        break;
      case TreeMethod::kFan:
        tree = build_fan(samples, root);
        break;
      case TreeMethod::kClusteredFan:
        tree = cluster_fan(samples, root, std::min(cfg_.clusters, cfg_.samples),
                           derive_seed(step_seed, 0x6b6d65616e73ULL));
        break;
      case TreeMethod::kReduced:
        tree = reduce_to_tree(samples, root, cfg_.eps_construction, cfg_.eps_reduction);
        break;
    }
  }
  try {
    return solve_tree_control(tree, x, in, site_, cfg_.milp, inspect_);
  } catch (const Error& e) {
    throw PolicyError(name_ + ": solve failed at step " + std::to_string(in.step) + ": " +
                      e.what());
  }
}

bool is_challenger(const std::string& algorithm) {
  return algorithm == "MPC" || algorithm == "SP" || algorithm == "2S-SP" ||
         algorithm == "2S-SP-C";
}

std::unique_ptr<Policy> make_policy(const std::string& algorithm, const SiteConfig& site,
                                    const AnalogModel* model, const ChallengerConfig& cfg) {
  if (algorithm == "HEU") return std::make_unique<HeuristicPolicy>(site);
  if (algorithm == "P-MPC")
    return std::make_unique<PerfectForecastPolicy>(site, cfg.sampler.horizon, cfg.milp);
  if (is_challenger(algorithm)) {
    if (!model) throw ConfigError(algorithm + " requires a fitted netload model");
    return std::make_unique<TreePolicy>(algorithm, site, cfg,
                                        std::make_shared<AnalogScenarioSampler>(*model));
  }
  throw ConfigError("unknown algorithm '" + algorithm + "'");
}

}  // namespace mgbench
