#pragma once

// The six benchmark policies. HEU is a myopic rule; all others solve the
// extensive-form MILP over a scenario tree built from either the true future
// (P-MPC) or sampled scenarios (MPC, SP, 2S-SP, 2S-SP-C, which differ only in
// the tree construction).

#include <cstdint>
#include <functional>
#include <memory>
#include <string>

#include "mgbench/core.hpp"
#include "mgbench/milp.hpp"
#include "mgbench/sampler.hpp"
#include "mgbench/tree.hpp"

namespace mgbench {

enum class TreeMethod { kAveraged, kFan, kClusteredFan, kReduced };

struct ChallengerConfig {
  TreeMethod method = TreeMethod::kFan;
  std::size_t samples = 20;       // scenarios drawn per decision
  std::size_t clusters = 20;      // clustered fan only
  double eps_construction = 0.2;  // reduced tree only
  double eps_reduction = 0.0;
  SamplerConfig sampler;
  std::uint64_t seed = 0;
  MilpOptions milp;

  // Per-algorithm defaults: MPC averages 50 samples, SP reduces 50,
  // 2S-SP fans out 20, 2S-SP-C clusters 100 down to at most 20.
  static ChallengerConfig defaults(const std::string& algorithm);
};

// Source of netload scenarios for a tree-based policy.
class ScenarioSampler {
 public:
  virtual ~ScenarioSampler() = default;
  virtual bool needs_future() const { return false; }
  virtual ScenarioMatrix draw(const History& h, const DecisionInput& in, std::size_t count,
                              std::size_t horizon, std::uint64_t seed) const = 0;
};

class AnalogScenarioSampler final : public ScenarioSampler {
 public:
  explicit AnalogScenarioSampler(AnalogModel model) : model_(std::move(model)) {}
  ScenarioMatrix draw(const History& h, const DecisionInput& in, std::size_t count,
                      std::size_t horizon, std::uint64_t seed) const override;
  const AnalogModel& model() const { return model_; }

 private:
  AnalogModel model_;
};

// Replays the true future `count` times; for perfect-information checks.
class TrueFutureSampler final : public ScenarioSampler {
 public:
  bool needs_future() const override { return true; }
  ScenarioMatrix draw(const History& h, const DecisionInput& in, std::size_t count,
                      std::size_t horizon, std::uint64_t seed) const override;
};

// Charges when netload is negative, discharges when positive, within power
// and stock limits. Always feasible without clamping.
Control heu_decide(const State& x, double netload, const BatteryParams& battery, double dt_hours);

class HeuristicPolicy final : public Policy {
 public:
  explicit HeuristicPolicy(SiteConfig site) : site_(std::move(site)) {}
  std::string name() const override { return "HEU"; }
  Control decide(const State& x, const History& h, const DecisionInput& in) override;

 private:
  SiteConfig site_;
};

// Hook for inspecting the MILP built at a given step (used by the LP export
// command); called before the solve.
using ProblemInspector = std::function<void(std::size_t step, const ExtensiveProblem&)>;

class PerfectForecastPolicy final : public Policy {
 public:
  PerfectForecastPolicy(SiteConfig site, std::size_t horizon = 23, MilpOptions milp = {})
      : site_(std::move(site)), horizon_(horizon), milp_(milp) {}
  std::string name() const override { return "P-MPC"; }
  bool needs_future() const override { return true; }
  Control decide(const State& x, const History& h, const DecisionInput& in) override;
  void set_inspector(ProblemInspector f) { inspect_ = std::move(f); }

 private:
  SiteConfig site_;
  std::size_t horizon_;
  MilpOptions milp_;
  ProblemInspector inspect_;
};

// Tree-based policy: draw scenarios, build the configured tree, solve the
// extensive MILP, apply the root control. The rolling horizon shrinks to the
// remaining steps near the end of a simulation.
class TreePolicy final : public Policy {
 public:
  TreePolicy(std::string name, SiteConfig site, ChallengerConfig cfg,
             std::shared_ptr<const ScenarioSampler> sampler)
      : name_(std::move(name)), site_(std::move(site)), cfg_(std::move(cfg)),
        sampler_(std::move(sampler)) {}
  std::string name() const override { return name_; }
  bool needs_future() const override { return sampler_->needs_future(); }
  Control decide(const State& x, const History& h, const DecisionInput& in) override;
  void set_inspector(ProblemInspector f) { inspect_ = std::move(f); }

 private:
  std::string name_;
  SiteConfig site_;
  ChallengerConfig cfg_;
  std::shared_ptr<const ScenarioSampler> sampler_;
  ProblemInspector inspect_;
};

// Builds one of HEU | P-MPC | MPC | SP | 2S-SP | 2S-SP-C. The analog model is
// required for the four sampling challengers.
std::unique_ptr<Policy> make_policy(const std::string& algorithm, const SiteConfig& site,
                                    const AnalogModel* model, const ChallengerConfig& cfg);

bool is_challenger(const std::string& algorithm);

}  // namespace mgbench
