// Command-line front end: synthetic data generation, CSV ingestion, benchmark
// runs, report re-emission, single simulations, and MILP export.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "mgbench/bench.hpp"
#include "mgbench/milp.hpp"
#include "mgbench/rng.hpp"

namespace {

using namespace mgbench;

std::string default_out_dir(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("MGBENCH_OUT_DIR"); env && *env) return env;
  return "out";
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void print_summary(const BenchmarkReport& report) {
  std::printf("%-10s %12s %14s %14s %14s %10s\n", "algorithm", "ms/it", "savings%%", "extra%%",
              "yearly EUR", "best%%");
  for (const auto& a : report.aggregates) {
    std::printf("%-10s %12.2f %14.2f %14.2f %14.0f %10.0f\n", a.algorithm.c_str(),
                a.mean_decision_ms, a.avg_savings_vs_heu_pct, a.avg_extra_vs_pmpc_pct,
                a.avg_yearly_savings_site_mean, a.best_challenger_pct);
  }
  for (const auto& r : report.rows)
    if (r.failed)
      std::fprintf(stderr, "FAILED %s/%s: %s\n", r.site.c_str(), r.algorithm.c_str(),
                   r.error.c_str());
}

// Shared ingestion for the one-site commands.
SiteSpec find_site(const ExperimentConfig& cfg, const std::string& site_id) {
  for (const auto& s : cfg.sites)
    if (s.ingest.id == site_id) return s;
  throw ConfigError("site '" + site_id + "' not in config");
}

int cmd_synth(const std::string& out_dir, int sites, int days, std::uint64_t seed) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  ExperimentConfig cfg;
  cfg.seed = seed;
  cfg.battery = BatteryParams{60.0, 15.0, -15.0, 0.95, 0.95, 0.0};
  for (int i = 0; i < sites; ++i) {
    SynthSpec spec;
    spec.site_index = i;
    spec.days = days;
    spec.seed = seed;
    const RawSeries raw = generate_synthetic_site(spec);
    const std::string id = "synth-" + std::to_string(i);
    const std::string csv = out_dir + "/" + id + ".csv";
    write_site_csv(raw, csv);
    SiteSpec site;
    site.ingest.id = id;
    site.ingest.csv_path = csv;
    site.ingest.columns = {"timestamp", "load_kwh", "pv_kwh"};
    cfg.sites.push_back(site);
    std::printf("wrote %s (%d days)\n", csv.c_str(), days);
  }
  if (!cfg.sites.empty()) cfg.trajectory_sites = {cfg.sites.front().ingest.id};
  std::ofstream out(out_dir + "/experiment.json", std::ios::binary);
  out << cfg.to_json();
  std::printf("wrote %s/experiment.json\n", out_dir.c_str());
  return 0;
}

int cmd_ingest(const ExperimentConfig& cfg, const std::string& site_id,
               const std::string& out_path) {
  const SiteSpec spec = find_site(cfg, site_id);
  const SiteDataset ds = ingest(spec.ingest, cfg.train_fraction);
  std::printf("%s: %zu hourly steps (train %zu, test %zu), %zu raw rows, %zu filled\n",
              ds.id.c_str(), ds.hourly.size(), ds.split, ds.test_steps(), ds.raw_rows,
              ds.filled_steps);
  if (!out_path.empty()) {
    std::string tsv = "time\tnetload_kwh\n";
    for (std::size_t i = 0; i < ds.hourly.size(); ++i)
      tsv += format_timestamp_utc(ds.hourly.timestamps[i]) + "\t" +
             std::to_string(ds.hourly.values[i]) + "\n";
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw Error("cannot write '" + out_path + "'");
    out << tsv;
    std::printf("wrote %s\n", out_path.c_str());
  }
  return 0;
}

int cmd_run(const std::string& config_path, const std::string& out_flag, int parallel) {
  ExperimentConfig cfg = ExperimentConfig::from_file(config_path);
  if (parallel > 0) cfg.parallelism = parallel;
  const BenchmarkReport report = run_benchmark(cfg);
  const std::string out_dir = default_out_dir(out_flag);
  emit_report(report, out_dir);
  print_summary(report);
  std::printf("report written to %s\n", out_dir.c_str());
  for (const auto& r : report.rows)
    if (r.failed) return 2;
  return 0;
}

int cmd_report(const std::string& json_path, const std::string& out_flag) {
  const BenchmarkReport report = BenchmarkReport::from_json(read_file(json_path));
  const std::string out_dir = default_out_dir(out_flag);
  emit_report(report, out_dir);
  print_summary(report);
  return 0;
}

int cmd_simulate(const std::string& config_path, const std::string& site_id,
                 const std::string& algorithm, const std::string& out_flag) {
  ExperimentConfig cfg = ExperimentConfig::from_file(config_path);
  cfg.algorithms = {"HEU", "P-MPC", algorithm};  // relatives need both baselines
  cfg.trajectory_sites = {site_id};
  ExperimentConfig one = cfg;
  one.sites = {find_site(cfg, site_id)};
  const BenchmarkReport report = run_benchmark(one);
  const std::string out_dir = default_out_dir(out_flag);
  emit_report(report, out_dir);
  print_summary(report);
  return 0;
}

int cmd_export_lp(const std::string& config_path, const std::string& site_id,
                  const std::string& algorithm, std::size_t step, const std::string& out_path) {
  ExperimentConfig cfg = ExperimentConfig::from_file(config_path);
  const SiteSpec spec = find_site(cfg, site_id);
  const SiteDataset ds = ingest(spec.ingest, cfg.train_fraction);
  const BatteryParams& battery = spec.battery ? *spec.battery : cfg.battery;
  const SiteConfig site = derive_site_config(ds, battery, cfg.tariff);

  AnalogModel model;
  const bool challenger = is_challenger(algorithm);
  if (challenger) {
    std::vector<double> train(ds.hourly.values.begin(),
                              ds.hourly.values.begin() + static_cast<std::ptrdiff_t>(ds.split));
    model = AnalogModel::fit(train, cfg.sampler);
  }
  ChallengerConfig ccfg = cfg.challenger(algorithm);
  ccfg.seed = derive_seed(cfg.seed, 0);
  auto policy = make_policy(algorithm, site, challenger ? &model : nullptr, ccfg);

  std::string captured;
  const std::size_t target = ds.split + step;
  auto inspector = [&](std::size_t at, const ExtensiveProblem& p) {
    if (at == target) captured = export_lp(p);
  };
  if (auto* tp = dynamic_cast<TreePolicy*>(policy.get()))
    tp->set_inspector(inspector);
  else if (auto* pp = dynamic_cast<PerfectForecastPolicy*>(policy.get()))
    pp->set_inspector(inspector);
  else
    throw ConfigError("export-lp: algorithm '" + algorithm + "' does not build a MILP");

  simulate(*policy, ds.hourly, site, ds.split, step + 1);
  if (captured.empty()) throw Error("export-lp: step not reached");
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw Error("cannot write '" + out_path + "'");
  out << captured;
  std::printf("wrote %s\n", out_path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Microgrid energy-management benchmark"};
  app.require_subcommand(1);

  std::string out_dir, config_path, site_id, algorithm, json_path, out_path;
  int sites = 3, days = 60, parallel = 0;
  std::uint64_t seed = 42;
  std::size_t step = 0;

  auto* synth = app.add_subcommand("synth", "Generate synthetic sites and an experiment config");
  synth->add_option("--out", out_dir, "Output directory");
  synth->add_option("--sites", sites, "Number of sites");
  synth->add_option("--days", days, "Days of 15-minute data per site");
  synth->add_option("--seed", seed, "Generator seed");

  auto* ing = app.add_subcommand("ingest", "Ingest one site's CSV and print a summary");
  ing->add_option("--config", config_path, "Experiment config JSON")->required();
  ing->add_option("--site", site_id, "Site id")->required();
  ing->add_option("--out", out_path, "Optional hourly netload TSV");

  auto* run = app.add_subcommand("run", "Run the configured benchmark");
  run->add_option("--config", config_path, "Experiment config JSON")->required();
  run->add_option("--out", out_dir, "Output directory (or MGBENCH_OUT_DIR)");
  run->add_option("--parallel", parallel, "Worker threads override");

  auto* rep = app.add_subcommand("report", "Re-emit CSV/TSV outputs from a report JSON");
  rep->add_option("--json", json_path, "report.json path")->required();
  rep->add_option("--out", out_dir, "Output directory");

  auto* sim = app.add_subcommand("simulate", "Run one site and algorithm, keep the trajectory");
  sim->add_option("--config", config_path, "Experiment config JSON")->required();
  sim->add_option("--site", site_id, "Site id")->required();
  sim->add_option("--algorithm", algorithm, "HEU|P-MPC|MPC|SP|2S-SP|2S-SP-C")->required();
  sim->add_option("--out", out_dir, "Output directory");

  auto* exp = app.add_subcommand("export-lp", "Export one decision's MILP in LP format");
  exp->add_option("--config", config_path, "Experiment config JSON")->required();
  exp->add_option("--site", site_id, "Site id")->required();
  exp->add_option("--algorithm", algorithm, "Tree-based algorithm")->required();
  exp->add_option("--step", step, "Test-window step index");
  exp->add_option("--out", out_path, "Output .lp path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) return cmd_synth(default_out_dir(out_dir), sites, days, seed);
    if (ing->parsed()) return cmd_ingest(ExperimentConfig::from_file(config_path), site_id,
                                         out_path);
    if (run->parsed()) return cmd_run(config_path, out_dir, parallel);
    if (rep->parsed()) return cmd_report(json_path, out_dir);
    if (sim->parsed()) return cmd_simulate(config_path, site_id, algorithm, out_dir);
    if (exp->parsed()) return cmd_export_lp(config_path, site_id, algorithm, step, out_path);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
