#pragma once

// Nonparametric autoregressive netload model. Fitting stores every
// (lag-window, continuation) pair from the training series; sampling finds
// the nearest stored windows to the current history and replays their
// continuations, level-corrected to join the last observation.

#include <cstdint>
#include <span>

#include "mgbench/core.hpp"
#include "mgbench/tree.hpp"

namespace mgbench {

struct SamplerConfig {
  std::size_t lags = 48;       // past observations matched against
  std::size_t horizon = 23;    // future steps per scenario
  std::size_t neighbors = 50;  // analog windows consulted per query
  void validate() const;
};

class AnalogModel {
 public:
  static AnalogModel fit(const NetloadSeries& training, const SamplerConfig& cfg);
  static AnalogModel fit(std::span<const double> training, const SamplerConfig& cfg);

  // Draws `count` scenarios of length min(horizon, cfg.horizon), deterministic
  // for a fixed seed. Each scenario is a stored continuation shifted by
  // (last observed value - matched window end).
  ScenarioMatrix sample(const History& h, std::size_t count, std::size_t horizon,
                        std::uint64_t seed) const;
  ScenarioMatrix sample(const History& h, std::size_t count, std::uint64_t seed) const {
    return sample(h, count, cfg_.horizon, seed);
  }

  const SamplerConfig& config() const { return cfg_; }
  std::size_t pair_count() const { return pairs_; }
  double train_min() const { return train_min_; }
  double train_max() const { return train_max_; }

 private:
  SamplerConfig cfg_;
  std::size_t pairs_ = 0;
  std::vector<double> windows_;        // pairs x lags, z-normalized per lag position
  std::vector<double> continuations_;  // pairs x (horizon + 1), raw kWh
  std::vector<double> window_end_;     // raw last value of each stored window
  std::vector<double> mean_, scale_;   // per lag position
  double train_min_ = 0.0, train_max_ = 0.0;
};

}  // namespace mgbench
