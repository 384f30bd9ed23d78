#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <thread>

#include <nlohmann/json.hpp>

#include "mgbench/bench.hpp"
#include "mgbench/rng.hpp"

namespace mgbench {

namespace {

using ordered = nlohmann::ordered_json;

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn) {
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  const int nthreads = std::min<std::size_t>(static_cast<std::size_t>(workers), count);
  pool.reserve(nthreads);
  for (int t = 0; t < nthreads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        fn(i);
      }
    });
  }
  for (auto& th : pool) th.join();
}

std::string traj_key(const std::string& site, const std::string& alg) { return site + "/" + alg; }

}  // namespace

void compute_metrics(std::vector<RunRow>& rows, std::vector<AlgoAggregate>& aggregates,
                     const std::vector<std::string>& algorithms) {
  auto find_cost = [&](const std::string& site, const std::string& alg, double& out) {
    for (const auto& r : rows)
      if (r.site == site && r.algorithm == alg && !r.failed) {
        out = r.total_cost;
        return true;
      }
    return false;
  };

  std::vector<std::string> sites;
  for (const auto& r : rows)
    if (std::find(sites.begin(), sites.end(), r.site) == sites.end()) sites.push_back(r.site);

  for (auto& r : rows) {
    if (r.failed) continue;
    double heu = 0.0, pmpc = 0.0;
    if (find_cost(r.site, "HEU", heu)) {
      r.savings_vs_heu_pct = heu != 0.0 ? 100.0 * (heu - r.total_cost) / heu : 0.0;
      r.yearly_savings_eur =
          r.test_steps > 0
              ? (heu - r.total_cost) * 8760.0 / static_cast<double>(r.test_steps)
              : 0.0;
    }
    if (find_cost(r.site, "P-MPC", pmpc))
      r.extra_vs_pmpc_pct = pmpc != 0.0 ? 100.0 * (r.total_cost - pmpc) / pmpc : 0.0;
  }

  // Best challenger per site; cost ties break on decision time.
  std::map<std::string, std::size_t> best_count;
  std::size_t sites_with_challenger = 0;
  for (const auto& site : sites) {
    const RunRow* best = nullptr;
    for (const auto& r : rows) {
      if (r.site != site || r.failed || !is_challenger(r.algorithm)) continue;
      if (!best || r.total_cost < best->total_cost ||
          (r.total_cost == best->total_cost && r.mean_decision_ms < best->mean_decision_ms))
        best = &r;
    }
    if (best) {
      ++sites_with_challenger;
      ++best_count[best->algorithm];
    }
  }

  aggregates.clear();
  for (const auto& alg : algorithms) {
    AlgoAggregate a;
    a.algorithm = alg;
    double pooled_savings = 0.0, pooled_steps = 0.0;
    for (const auto& r : rows) {
      if (r.algorithm != alg || r.failed) continue;
      ++a.sites_ok;
      a.avg_savings_vs_heu_pct += r.savings_vs_heu_pct;
      a.avg_extra_vs_pmpc_pct += r.extra_vs_pmpc_pct;
      a.avg_yearly_savings_site_mean += r.yearly_savings_eur;
      a.mean_decision_ms += r.mean_decision_ms;
      double heu = 0.0;
      if (find_cost(r.site, "HEU", heu)) {
        pooled_savings += heu - r.total_cost;
        pooled_steps += static_cast<double>(r.test_steps);
      }
    }
    if (a.sites_ok > 0) {
      const double n = static_cast<double>(a.sites_ok);
      a.avg_savings_vs_heu_pct /= n;
      a.avg_extra_vs_pmpc_pct /= n;
      a.avg_yearly_savings_site_mean /= n;
      a.mean_decision_ms /= n;
    }
    a.avg_yearly_savings_pooled = pooled_steps > 0.0 ? pooled_savings * 8760.0 / pooled_steps : 0.0;
    if (is_challenger(alg) && sites_with_challenger > 0)
      a.best_challenger_pct = 100.0 * static_cast<double>(best_count[alg]) /
                              static_cast<double>(sites_with_challenger);
    aggregates.push_back(std::move(a));
  }
}

BenchmarkReport run_benchmark(const ExperimentConfig& config) {
  if (config.sites.empty()) throw ConfigError("run_benchmark: no sites configured");
  if (config.algorithms.empty()) throw ConfigError("run_benchmark: no algorithms configured");

  struct SiteContext {
    SiteDataset dataset;
    SiteConfig site;
    AnalogModel model;
    bool model_ready = false;
    std::string fit_error;
  };
  std::vector<SiteContext> contexts(config.sites.size());

  bool any_challenger = false;
  for (const auto& alg : config.algorithms) any_challenger |= is_challenger(alg);

  for (std::size_t i = 0; i < config.sites.size(); ++i) {
    const auto& spec = config.sites[i];
    contexts[i].dataset = ingest(spec.ingest, config.train_fraction);
    const BatteryParams& battery = spec.battery ? *spec.battery : config.battery;
    contexts[i].site = derive_site_config(contexts[i].dataset, battery, config.tariff);
    if (any_challenger) {
      // A site whose training window cannot support the sampler fails its
      // challenger runs, not the whole benchmark.
      try {
        std::vector<double> train(contexts[i].dataset.hourly.values.begin(),
                                  contexts[i].dataset.hourly.values.begin() +
                                      static_cast<std::ptrdiff_t>(contexts[i].dataset.split));
        contexts[i].model = AnalogModel::fit(train, config.sampler);
        contexts[i].model_ready = true;
      } catch (const std::exception& e) {
        contexts[i].fit_error = e.what();
      }
    }
  }

  struct Job {
    std::size_t site_index;
    std::size_t alg_index;
  };
  std::vector<Job> jobs;
  for (std::size_t s = 0; s < config.sites.size(); ++s)
    for (std::size_t a = 0; a < config.algorithms.size(); ++a) jobs.push_back({s, a});

  std::vector<RunRow> rows(jobs.size());
  std::vector<std::vector<TrajectoryPoint>> trajectories(jobs.size());
  const auto& traj_sites = config.trajectory_sites;

  parallel_for(jobs.size(), config.parallelism, [&](std::size_t j) {
    const auto& job = jobs[j];
    const auto& ctx = contexts[job.site_index];
    const std::string& alg = config.algorithms[job.alg_index];
    RunRow row;
    row.site = ctx.dataset.id;
    row.algorithm = alg;
    try {
      if (is_challenger(alg) && !ctx.fit_error.empty())
        throw ConfigError("model fit failed: " + ctx.fit_error);
      ChallengerConfig cfg = config.challenger(alg);
      cfg.seed = derive_seed(config.seed, job.site_index * 1000 + job.alg_index);
      auto policy = make_policy(alg, ctx.site, ctx.model_ready ? &ctx.model : nullptr, cfg);
      const SimulationResult sim =
          simulate(*policy, ctx.dataset.hourly, ctx.site, ctx.dataset.split);
      row.total_cost = sim.total_cost;
      row.test_steps = sim.steps.size();
      row.clamp_events = sim.clamp_events;
      row.mean_decision_ms = sim.mean_decision_seconds() * 1000.0;
      const bool keep_traj =
          traj_sites.empty()
              ? false
              : std::find(traj_sites.begin(), traj_sites.end(), row.site) != traj_sites.end();
      if (keep_traj) {
        auto& traj = trajectories[j];
        traj.reserve(sim.steps.size());
        for (const auto& s : sim.steps) {
          TrajectoryPoint p;
          p.time = s.timestamp;
          p.soc = s.soc;
          p.control = s.control;
          p.netload = s.netload;
          p.grid_import = s.grid_import;
          p.price = ctx.site.tariff.price_per_kwh[static_cast<std::size_t>(
              ((s.timestamp % 86400) + 86400) % 86400 / 3600)];
          p.subscribed_power = ctx.site.tariff.subscribed_power;
          traj.push_back(p);
        }
      }
    } catch (const std::exception& e) {
      row.failed = true;
      row.error = e.what();
    }
    rows[j] = std::move(row);
  });

  BenchmarkReport report;
  report.config_json = config.to_json();
  report.rows = std::move(rows);
  compute_metrics(report.rows, report.aggregates, config.algorithms);
  for (std::size_t j = 0; j < jobs.size(); ++j)
    if (!trajectories[j].empty())
      report.trajectories[traj_key(report.rows[j].site, report.rows[j].algorithm)] =
          std::move(trajectories[j]);
  return report;
}

// ---- serialization ----

std::string BenchmarkReport::to_json() const {
  ordered doc;
  doc["schema_version"] = schema_version;
  doc["test_window"] = test_window;
  doc["tie_break"] = tie_break;
  doc["config"] = ordered::parse(config_json.empty() ? "{}" : config_json);
  doc["rows"] = ordered::array();
  for (const auto& r : rows) {
    ordered j;
    j["site"] = r.site;
    j["algorithm"] = r.algorithm;
    j["failed"] = r.failed;
    if (r.failed) j["error"] = r.error;
    j["total_cost_eur"] = r.total_cost;
    j["test_steps"] = r.test_steps;
    j["clamp_events"] = r.clamp_events;
    j["savings_vs_heu_pct"] = r.savings_vs_heu_pct;
    j["extra_vs_pmpc_pct"] = r.extra_vs_pmpc_pct;
    j["yearly_savings_eur"] = r.yearly_savings_eur;
    doc["rows"].push_back(j);
  }
  doc["aggregates"] = ordered::array();
  for (const auto& a : aggregates) {
    ordered j;
    j["algorithm"] = a.algorithm;
    j["sites_ok"] = a.sites_ok;
    j["avg_savings_vs_heu_pct"] = a.avg_savings_vs_heu_pct;
    j["avg_extra_vs_pmpc_pct"] = a.avg_extra_vs_pmpc_pct;
    j["avg_yearly_savings_site_mean_eur"] = a.avg_yearly_savings_site_mean;
    j["avg_yearly_savings_pooled_eur"] = a.avg_yearly_savings_pooled;
    j["best_challenger_pct"] = a.best_challenger_pct;
    doc["aggregates"].push_back(j);
  }
  ordered traj;
  for (const auto& [key, points] : trajectories) {
    ordered arr = ordered::array();
    for (const auto& p : points) {
      ordered j;
      j["time"] = p.time;
      j["soc"] = p.soc;
      j["control"] = p.control;
      j["netload"] = p.netload;
      j["import"] = p.grid_import;
      j["price"] = p.price;
      j["subscribed_power"] = p.subscribed_power;
      arr.push_back(j);
    }
    traj[key] = std::move(arr);
  }
  doc["trajectories"] = std::move(traj);
  // Wall-clock fields live apart so the rest of the report is reproducible.
  ordered timings;
  timings["rows"] = ordered::array();
  for (const auto& r : rows) {
    ordered j;
    j["site"] = r.site;
    j["algorithm"] = r.algorithm;
    j["mean_decision_ms"] = r.mean_decision_ms;
    timings["rows"].push_back(j);
  }
  timings["aggregates"] = ordered::array();
  for (const auto& a : aggregates) {
    ordered j;
    j["algorithm"] = a.algorithm;
    j["mean_decision_ms"] = a.mean_decision_ms;
    timings["aggregates"].push_back(j);
  }
  doc["timings"] = std::move(timings);
  return doc.dump(2);
}

BenchmarkReport BenchmarkReport::from_json(const std::string& text) {
  const auto doc = nlohmann::json::parse(text);
  BenchmarkReport rep;
  rep.schema_version = doc.at("schema_version").get<int>();
  rep.test_window = doc.value("test_window", rep.test_window);
  rep.tie_break = doc.value("tie_break", rep.tie_break);
  if (doc.contains("config")) rep.config_json = doc.at("config").dump(2);
  for (const auto& j : doc.at("rows")) {
    RunRow r;
    r.site = j.at("site").get<std::string>();
    r.algorithm = j.at("algorithm").get<std::string>();
    r.failed = j.value("failed", false);
    r.error = j.value("error", "");
    r.total_cost = j.value("total_cost_eur", 0.0);
    r.test_steps = j.value("test_steps", 0ULL);
    r.clamp_events = j.value("clamp_events", 0ULL);
    r.savings_vs_heu_pct = j.value("savings_vs_heu_pct", 0.0);
    r.extra_vs_pmpc_pct = j.value("extra_vs_pmpc_pct", 0.0);
    r.yearly_savings_eur = j.value("yearly_savings_eur", 0.0);
    rep.rows.push_back(std::move(r));
  }
  for (const auto& j : doc.at("aggregates")) {
    AlgoAggregate a;
    a.algorithm = j.at("algorithm").get<std::string>();
    a.sites_ok = j.value("sites_ok", 0ULL);
    a.avg_savings_vs_heu_pct = j.value("avg_savings_vs_heu_pct", 0.0);
    a.avg_extra_vs_pmpc_pct = j.value("avg_extra_vs_pmpc_pct", 0.0);
    a.avg_yearly_savings_site_mean = j.value("avg_yearly_savings_site_mean_eur", 0.0);
    a.avg_yearly_savings_pooled = j.value("avg_yearly_savings_pooled_eur", 0.0);
    a.best_challenger_pct = j.value("best_challenger_pct", 0.0);
    rep.aggregates.push_back(std::move(a));
  }
  if (doc.contains("trajectories")) {
    for (const auto& [key, arr] : doc.at("trajectories").items()) {
      std::vector<TrajectoryPoint> points;
      for (const auto& j : arr) {
        TrajectoryPoint p;
        p.time = j.at("time").get<std::int64_t>();
        p.soc = j.at("soc").get<double>();
        p.control = j.at("control").get<double>();
        p.netload = j.at("netload").get<double>();
        p.grid_import = j.at("import").get<double>();
        p.price = j.at("price").get<double>();
        p.subscribed_power = j.at("subscribed_power").get<double>();
        points.push_back(p);
      }
      rep.trajectories[key] = std::move(points);
    }
  }
  if (doc.contains("timings")) {
    for (const auto& j : doc.at("timings").at("rows")) {
      const auto site = j.at("site").get<std::string>();
      const auto alg = j.at("algorithm").get<std::string>();
      for (auto& r : rep.rows)
        if (r.site == site && r.algorithm == alg) r.mean_decision_ms = j.at("mean_decision_ms");
    }
    for (const auto& j : doc.at("timings").at("aggregates")) {
      const auto alg = j.at("algorithm").get<std::string>();
      for (auto& a : rep.aggregates)
        if (a.algorithm == alg) a.mean_decision_ms = j.at("mean_decision_ms");
    }
  }
  return rep;
}

namespace {

std::string num(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << content;
}

}  // namespace

void emit_report(const BenchmarkReport& report, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error("cannot create output directory '" + out_dir + "'");

  write_file(out_dir + "/report.json", report.to_json());

  // Summary table, one row per algorithm.
  std::string csv =
      "algorithm,mean_processing_ms,avg_savings_vs_heu_pct,extra_cost_vs_pmpc_pct,"
      "avg_yearly_savings_eur,times_best_challenger_pct\n";
  for (const auto& a : report.aggregates) {
    csv += a.algorithm + "," + num(a.mean_decision_ms) + "," + num(a.avg_savings_vs_heu_pct) +
           "," + num(a.avg_extra_vs_pmpc_pct) + "," + num(a.avg_yearly_savings_site_mean) + "," +
           num(a.best_challenger_pct) + "\n";
  }
  write_file(out_dir + "/summary.csv", csv);

  // Long-form savings distribution for plotting.
  std::string tsv = "site\talgorithm\tsavings_vs_heu_pct\n";
  for (const auto& r : report.rows) {
    if (r.failed || r.algorithm == "HEU") continue;
    tsv += r.site + "\t" + r.algorithm + "\t" + num(r.savings_vs_heu_pct) + "\n";
  }
  write_file(out_dir + "/savings_vs_heu.tsv", tsv);

  for (const auto& [key, points] : report.trajectories) {
    std::string name = key;
    std::replace(name.begin(), name.end(), '/', '_');
    std::string t = "time\tsoc\timport\tprice\tsubscribed_power\tnetload\tcontrol\n";
    for (const auto& p : points) {
      t += format_timestamp_utc(p.time) + "\t" + num(p.soc) + "\t" + num(p.grid_import) + "\t" +
           num(p.price) + "\t" + num(p.subscribed_power) + "\t" + num(p.netload) + "\t" +
           num(p.control) + "\n";
    }
    write_file(out_dir + "/trajectory_" + name + ".tsv", t);
  }
}

}  // namespace mgbench
