#pragma once

// Discrete-time microgrid model: battery dynamics, grid-import computation,
// stage cost, and the closed-loop simulator that evaluates a control policy
// on a netload scenario.
//
// Unit convention: all per-step quantities are energies in kWh. Power ratings
// (kW) are converted once via the step length, so a control is the energy
// charged (positive) or discharged (negative) during one step.

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mgbench {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConfigError : Error {
  using Error::Error;
};
struct PolicyError : Error {
  using Error::Error;
};
struct SolveError : Error {
  using Error::Error;
};
struct IngestError : Error {
  using Error::Error;
};

// SOC and control feasibility tolerance, kWh.
inline constexpr double kFeasTol = 1e-6;

struct BatteryParams {
  double capacity = 0.0;       // usable energy, kWh, > 0
  double max_charge = 0.0;     // kW, > 0
  double max_discharge = 0.0;  // kW, < 0
  double eff_charge = 1.0;     // (0, 1]
  double eff_discharge = 1.0;  // (0, 1]
  double initial_soc = 0.0;    // kWh, in [0, capacity]
  void validate() const;
};

// Time-of-use import tariff with a fixed penalty charged on every step whose
// import strictly exceeds the subscribed power.
struct Tariff {
  std::array<double, 24> price_per_kwh{};  // EUR/kWh by hour of day
  double overrun_penalty = 0.0;            // EUR per overrun step
  double subscribed_power = 0.0;           // kWh per step, >= 0
  void validate() const;
};

struct SiteConfig {
  BatteryParams battery;
  Tariff tariff;
  double dt_hours = 1.0;
  std::size_t horizon = 0;  // simulation length in steps; 0 = whole series

  // Per-step energy bounds on the battery control, kWh.
  double charge_bound() const { return battery.max_charge * dt_hours; }
  double discharge_bound() const { return battery.max_discharge * dt_hours; }
  void validate() const;
};

// Observed exogenous uncertainty: netload = demand - local production.
struct NetloadSeries {
  std::vector<std::int64_t> timestamps;  // epoch seconds, constant spacing
  std::vector<double> values;            // kWh per step, may be negative

  std::size_t size() const { return values.size(); }
  int hour_of_day(std::size_t i) const {
    return static_cast<int>(((timestamps[i] % 86400) + 86400) % 86400 / 3600);
  }
  void validate() const;
};

struct State {
  double soc = 0.0;  // kWh
};

struct Control {
  double battery = 0.0;  // kWh per step; positive = charge
};

// Observation window handed to a policy at step t. It exposes exactly the
// netload values w_0 .. w_t; any access past t throws. Policies without the
// oracle flag cannot read the future through this interface.
class History {
 public:
  History(std::span<const double> all, std::size_t now) : all_(all), now_(now) {
    if (now_ >= all_.size()) throw std::out_of_range("History: now past end of series");
  }

  double operator[](std::size_t s) const {
    if (s > now_) throw std::out_of_range("History: access beyond current step");
    return all_[s];
  }
  double last() const { return all_[now_]; }
  std::size_t size() const { return now_ + 1; }

  // The most recent n observations, oldest first.
  std::span<const double> last_n(std::size_t n) const {
    if (n > size()) throw std::out_of_range("History: window longer than history");
    return all_.subspan(now_ + 1 - n, n);
  }

 private:
  std::span<const double> all_;
  std::size_t now_;
};

// Extra per-decision inputs beyond (state, history).
struct DecisionInput {
  std::size_t step = 0;  // index into the series
  int hour_of_day = 0;
  std::size_t steps_remaining = 0;  // steps after this one in the simulation
  // True netloads w_{t+1}.. for oracle policies; empty otherwise.
  std::span<const double> true_future{};
};

class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  // Declares that the policy receives the true future through
  // DecisionInput::true_future. Only the perfect-forecast baseline sets this.
  virtual bool needs_future() const { return false; }
  virtual Control decide(const State& x, const History& h, const DecisionInput& in) = 0;
};

struct StepRecord {
  std::int64_t timestamp = 0;
  double soc = 0.0;       // s_t at the start of the step
  double control = 0.0;   // applied battery energy
  double netload = 0.0;   // w_t
  double grid_import = 0.0;
  double cost = 0.0;      // EUR
  double decision_seconds = 0.0;
};

struct SimulationResult {
  double total_cost = 0.0;
  double final_soc = 0.0;
  std::vector<StepRecord> steps;
  // Controls that had to be projected onto the feasible set by more than
  // kFeasTol; nonzero counts indicate a policy defect.
  std::size_t clamp_events = 0;
  double max_clamp = 0.0;

  double mean_decision_seconds() const;
};

// s' = s + eff_charge * max(0, pb) + min(0, pb) / eff_discharge.
// Pure arithmetic; the caller checks 0 <= s' <= capacity.
double step_dynamics(double soc, double pb, const BatteryParams& battery);

// e = max(0, w + pb); energy drawn from the grid. Exports earn nothing.
double grid_import(double netload, double pb);

// price[hour] * e, plus the penalty when e strictly exceeds the subscription.
double stage_cost(double import_kwh, int hour_of_day, const Tariff& tariff);

// Closed-loop rollout of `policy` over series[start .. start+steps). The
// policy's control is projected onto the control bounds and then onto
// SOC-feasibility before being applied; projections beyond kFeasTol are
// counted as policy defects. Decision wall-clock time is recorded per step.
SimulationResult simulate(Policy& policy, const NetloadSeries& series, const SiteConfig& site,
                          std::size_t start = 0,
                          std::size_t steps = std::numeric_limits<std::size_t>::max());

}  // namespace mgbench
