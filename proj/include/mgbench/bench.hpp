#pragma once

// Benchmark harness: CSV ingestion to hourly netload, per-site tariff
// derivation, the site x algorithm experiment runner, metric aggregation, and
// report emission (JSON + CSV summary + plot-data TSVs). A synthetic site
// generator makes the whole pipeline runnable without external data.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mgbench/controllers.hpp"
#include "mgbench/core.hpp"
#include "mgbench/sampler.hpp"

namespace mgbench {

// ---- ingestion ----

struct ColumnMap {
  std::string timestamp = "timestamp";
  std::string load = "load";
  std::string pv = "pv";
};

enum class FillPolicy { kNone, kZero, kInterpolate };
enum class ValueUnit { kKwhPerStep, kKw };

struct IngestSpec {
  std::string id;
  std::string csv_path;
  ColumnMap columns;
  int raw_step_minutes = 15;
  ValueUnit unit = ValueUnit::kKwhPerStep;
  FillPolicy fill = FillPolicy::kNone;
};

// Raw load/production series before hourly resampling.
struct RawSeries {
  std::vector<std::int64_t> timestamps;  // epoch seconds
  std::vector<double> load;              // kWh per raw step (or kW, per unit)
  std::vector<double> pv;
};

struct SiteDataset {
  std::string id;
  NetloadSeries hourly;            // resampled netload
  std::size_t split = 0;           // first test index (train = [0, split))
  std::size_t raw_rows = 0;        // raw rows aggregated (after edge trimming)
  std::size_t filled_steps = 0;    // gap steps filled by the fill policy
  double raw_netload_sum = 0.0;    // over the aggregated rows

  std::size_t test_steps() const { return hourly.size() - split; }
};

SiteDataset ingest(const IngestSpec& spec, double train_fraction = 0.6);
SiteDataset ingest_raw(const std::string& id, const RawSeries& raw, int raw_step_minutes,
                       ValueUnit unit, FillPolicy fill, double train_fraction = 0.6);

// RFC 3339 ("2020-01-01T00:00:00Z", optional offset) or plain epoch seconds.
std::int64_t parse_timestamp(const std::string& text);
std::string format_timestamp_utc(std::int64_t epoch);

// ---- tariff & site derivation ----

struct TariffTemplate {
  double offpeak_price = 0.102;  // EUR/kWh
  double peak_price = 0.153;
  std::vector<int> offpeak_hours = {0, 1, 2, 3, 4, 5, 9, 10, 13, 14, 15, 16, 21, 22, 23};
  double overrun_penalty = 14.31;  // EUR per overrun step
};

// Subscribed power = max netload over the full series minus the per-step
// charge bound (floored at zero).
SiteConfig derive_site_config(const SiteDataset& dataset, const BatteryParams& battery,
                              const TariffTemplate& tariff, double dt_hours = 1.0);

// ---- experiment configuration ----

struct SiteSpec {
  IngestSpec ingest;
  std::optional<BatteryParams> battery;  // overrides the experiment default
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  int parallelism = 1;
  double solver_time_limit_seconds = 5.0;
  double train_fraction = 0.6;
  BatteryParams battery;
  TariffTemplate tariff;
  SamplerConfig sampler;
  std::vector<std::string> algorithms = {"HEU", "P-MPC", "MPC", "SP", "2S-SP", "2S-SP-C"};
  std::map<std::string, ChallengerConfig> challengers;  // keyed by algorithm
  std::vector<SiteSpec> sites;
  std::vector<std::string> trajectory_sites;  // sites whose trajectories are kept

  static ExperimentConfig from_json(const std::string& text);
  static ExperimentConfig from_file(const std::string& path);
  std::string to_json() const;

  // Challenger config for an algorithm with sampler/seed/time limit applied.
  ChallengerConfig challenger(const std::string& algorithm) const;
};

// ---- benchmark results ----

struct RunRow {
  std::string site;
  std::string algorithm;
  bool failed = false;
  std::string error;
  double total_cost = 0.0;  // EUR over the test window
  std::size_t test_steps = 0;
  std::size_t clamp_events = 0;
  double savings_vs_heu_pct = 0.0;
  double extra_vs_pmpc_pct = 0.0;
  double yearly_savings_eur = 0.0;
  double mean_decision_ms = 0.0;  // emitted under the timings section
};

struct AlgoAggregate {
  std::string algorithm;
  double avg_savings_vs_heu_pct = 0.0;
  double avg_extra_vs_pmpc_pct = 0.0;
  double avg_yearly_savings_site_mean = 0.0;  // mean of per-site annualized savings
  double avg_yearly_savings_pooled = 0.0;     // pooled savings annualized once
  double best_challenger_pct = 0.0;
  double mean_decision_ms = 0.0;  // emitted under the timings section
  std::size_t sites_ok = 0;
};

struct TrajectoryPoint {
  std::int64_t time = 0;
  double soc = 0.0;
  double control = 0.0;
  double netload = 0.0;
  double grid_import = 0.0;
  double price = 0.0;
  double subscribed_power = 0.0;
};

struct BenchmarkReport {
  int schema_version = 1;
  std::string test_window = "trailing 40%";
  std::string tie_break = "lower mean decision time";
  std::string config_json;  // experiment echo
  std::vector<RunRow> rows;  // sorted by (site, algorithm order in config)
  std::vector<AlgoAggregate> aggregates;
  std::map<std::string, std::vector<TrajectoryPoint>> trajectories;  // "site/algorithm"

  std::string to_json() const;
  static BenchmarkReport from_json(const std::string& text);
};

// Derives relative metrics and per-algorithm aggregates from raw cost rows;
// exposed separately so reports can be audited against their own rows.
void compute_metrics(std::vector<RunRow>& rows, std::vector<AlgoAggregate>& aggregates,
                     const std::vector<std::string>& algorithms);

BenchmarkReport run_benchmark(const ExperimentConfig& config);

// report.json, summary.csv, savings_vs_heu.tsv, trajectory_<site>_<alg>.tsv.
void emit_report(const BenchmarkReport& report, const std::string& out_dir);

// ---- synthetic sites ----

struct SynthSpec {
  int site_index = 0;
  int days = 30;
  std::uint64_t seed = 42;
  int raw_step_minutes = 15;
  std::int64_t start_epoch = 1577836800;  // 2020-01-01T00:00:00Z
};

RawSeries generate_synthetic_site(const SynthSpec& spec);
void write_site_csv(const RawSeries& raw, const std::string& path);

}  // namespace mgbench
