#include "mgbench/core.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace mgbench {

void BatteryParams::validate() const {
  if (!(capacity > 0.0) || !std::isfinite(capacity))
    throw ConfigError("battery capacity must be > 0");
  if (!(max_charge > 0.0) || !std::isfinite(max_charge))
    throw ConfigError("battery max_charge must be > 0");
  if (!(max_discharge < 0.0) || !std::isfinite(max_discharge))
    throw ConfigError("battery max_discharge must be < 0");
  if (!(eff_charge > 0.0 && eff_charge <= 1.0))
    throw ConfigError("battery eff_charge must be in (0, 1]");
  if (!(eff_discharge > 0.0 && eff_discharge <= 1.0))
    throw ConfigError("battery eff_discharge must be in (0, 1]");
  if (!(initial_soc >= 0.0 && initial_soc <= capacity))
    throw ConfigError("battery initial_soc must be in [0, capacity]");
}

void Tariff::validate() const {
  for (double p : price_per_kwh)
    if (!(p >= 0.0) || !std::isfinite(p)) throw ConfigError("tariff prices must be finite and >= 0");
  if (!(overrun_penalty >= 0.0) || !std::isfinite(overrun_penalty))
    throw ConfigError("tariff overrun_penalty must be >= 0");
  if (!(subscribed_power >= 0.0) || !std::isfinite(subscribed_power))
    throw ConfigError("tariff subscribed_power must be >= 0");
}

void SiteConfig::validate() const {
  battery.validate();
  tariff.validate();
  if (!(dt_hours > 0.0)) throw ConfigError("dt_hours must be > 0");
}

void NetloadSeries::validate() const {
  if (timestamps.size() != values.size())
    throw ConfigError("netload series: timestamps and values differ in length");
  if (values.empty()) throw ConfigError("netload series: empty");
  for (double v : values)
    if (!std::isfinite(v)) throw ConfigError("netload series: non-finite value");
  if (timestamps.size() >= 2) {
    const std::int64_t step = timestamps[1] - timestamps[0];
    if (step <= 0) throw ConfigError("netload series: timestamps not increasing");
    for (std::size_t i = 1; i < timestamps.size(); ++i)
      if (timestamps[i] - timestamps[i - 1] != step)
        throw ConfigError("netload series: non-constant timestamp spacing");
  }
}

double SimulationResult::mean_decision_seconds() const {
  if (steps.empty()) return 0.0;
  double s = 0.0;
  for (const auto& r : steps) s += r.decision_seconds;
  return s / static_cast<double>(steps.size());
}

double step_dynamics(double soc, double pb, const BatteryParams& battery) {
  return soc + battery.eff_charge * std::max(0.0, pb) + std::min(0.0, pb) / battery.eff_discharge;
}

double grid_import(double netload, double pb) { return std::max(0.0, netload + pb); }

double stage_cost(double import_kwh, int hour_of_day, const Tariff& tariff) {
  if (!(import_kwh >= 0.0))
    throw std::invalid_argument("stage_cost: import must be >= 0");
  if (hour_of_day < 0 || hour_of_day >= 24)
    throw std::invalid_argument("stage_cost: hour_of_day out of range");
  double cost = tariff.price_per_kwh[static_cast<std::size_t>(hour_of_day)] * import_kwh;
  if (import_kwh > tariff.subscribed_power) cost += tariff.overrun_penalty;
  return cost;
}

SimulationResult simulate(Policy& policy, const NetloadSeries& series, const SiteConfig& site,
                          std::size_t start, std::size_t steps) {
  series.validate();
  site.validate();
  const std::size_t n = series.size();
  if (start >= n) throw ConfigError("simulate: start index past end of series");
  const std::size_t end = (steps == std::numeric_limits<std::size_t>::max() || start + steps > n)
                              ? n
                              : start + steps;

  const BatteryParams& bat = site.battery;
  const double pb_lo = site.discharge_bound();
  const double pb_hi = site.charge_bound();
  const bool oracle = policy.needs_future();

  SimulationResult result;
  result.steps.reserve(end - start);
  double soc = bat.initial_soc;

  for (std::size_t t = start; t < end; ++t) {
    const double w = series.values[t];
    History h(series.values, t);
    DecisionInput in;
    in.step = t;
    in.hour_of_day = series.hour_of_day(t);
    in.steps_remaining = end - t - 1;
    if (oracle)
      in.true_future = std::span<const double>(series.values).subspan(t + 1, end - t - 1);

    const auto clock0 = std::chrono::steady_clock::now();
    const Control u = policy.decide(State{soc}, h, in);
    const auto clock1 = std::chrono::steady_clock::now();

    if (!std::isfinite(u.battery))
      throw PolicyError("policy '" + policy.name() + "' returned a non-finite control at step " +
                        std::to_string(t));

    // Project onto control bounds, then onto SOC feasibility.
    double lo = std::max(pb_lo, -bat.eff_discharge * soc);
    double hi = std::min(pb_hi, (bat.capacity - soc) / bat.eff_charge);
    if (lo > hi) {
      if (lo > hi + kFeasTol)
        throw PolicyError("simulate: empty feasible control set at step " + std::to_string(t));
      lo = hi = 0.5 * (lo + hi);
    }
    const double pb = std::clamp(u.battery, lo, hi);
    const double moved = std::abs(pb - u.battery);
    if (moved > kFeasTol) {
      ++result.clamp_events;
      result.max_clamp = std::max(result.max_clamp, moved);
    }

    const double imp = grid_import(w, pb);
    const double cost = stage_cost(imp, in.hour_of_day, site.tariff);
    double next = step_dynamics(soc, pb, bat);
    if (next < -kFeasTol || next > bat.capacity + kFeasTol)
      throw PolicyError("simulate: SOC out of bounds beyond tolerance at step " +
                        std::to_string(t));
    next = std::clamp(next, 0.0, bat.capacity);

    StepRecord rec;
    rec.timestamp = series.timestamps[t];
    rec.soc = soc;
    rec.control = pb;
    rec.netload = w;
    rec.grid_import = imp;
    rec.cost = cost;
    rec.decision_seconds = std::chrono::duration<double>(clock1 - clock0).count();
    result.steps.push_back(rec);

    result.total_cost += cost;
    soc = next;
  }
  result.final_soc = soc;
  return result;
}

}  // namespace mgbench
