#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mgbench/bench.hpp"
#include "mgbench/rng.hpp"

namespace mgbench {

namespace {

// Days since 1970-01-01 for a civil date (proleptic Gregorian).
std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const int era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = static_cast<unsigned>((153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1);
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return static_cast<std::int64_t>(era) * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
  y = static_cast<int>(yy + (m <= 2));
}

}  // namespace

std::int64_t parse_timestamp(const std::string& text) {
  if (text.empty()) throw IngestError("empty timestamp");
  const bool digits_only =
      text.find_first_not_of("0123456789-") == std::string::npos && text.find('-') > 0;
  if (digits_only && text.find('-') == std::string::npos)
    return std::stoll(text);

  int y, mo, d, h = 0, mi = 0, s = 0;
  char sep;
  if (std::sscanf(text.c_str(), "%d-%d-%d%c%d:%d:%d", &y, &mo, &d, &sep, &h, &mi, &s) < 3)
    throw IngestError("unparseable timestamp '" + text + "'");
  std::int64_t epoch = days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + s;
  // Trailing offset: Z, +HH:MM or -HH:MM.
  const auto tpos = text.find_first_of("Tt ");
  if (tpos != std::string::npos) {
    const std::string tail = text.substr(tpos + 1);
    const auto off = tail.find_first_of("+-");
    if (off != std::string::npos) {
      int oh = 0, om = 0;
      if (std::sscanf(tail.c_str() + off + 1, "%d:%d", &oh, &om) >= 1) {
        const std::int64_t shift = oh * 3600 + om * 60;
        epoch += tail[off] == '+' ? -shift : shift;
      }
    }
  }
  return epoch;
}

std::string format_timestamp_utc(std::int64_t epoch) {
  const std::int64_t days = epoch >= 0 ? epoch / 86400 : (epoch - 86399) / 86400;
  std::int64_t rem = epoch - days * 86400;
  int y, m, d;
  civil_from_days(days, y, m, d);
  char buf[40];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02dZ", y, m, d,
                static_cast<int>(rem / 3600), static_cast<int>(rem % 3600 / 60),
                static_cast<int>(rem % 60));
  return buf;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
    } else if (c == ',' && !quoted) {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

SiteDataset aggregate_hourly(const std::string& id, std::vector<std::int64_t> ts,
                             std::vector<double> netload, int raw_step_minutes, FillPolicy fill,
                             double train_fraction) {
  if (ts.empty()) throw IngestError(id + ": no data rows");
  const std::int64_t step = static_cast<std::int64_t>(raw_step_minutes) * 60;
  if (step <= 0 || 3600 % step != 0)
    throw IngestError(id + ": raw step must divide one hour");

  // Gap handling.
  std::vector<std::int64_t> fts;
  std::vector<double> fv;
  fts.reserve(ts.size());
  fv.reserve(ts.size());
  std::size_t filled = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (i > 0) {
      const std::int64_t gap = ts[i] - ts[i - 1];
      if (gap <= 0)
        throw IngestError(id + ": non-monotonic timestamp at row " + std::to_string(i + 2) +
                          " (" + format_timestamp_utc(ts[i]) + ")");
      if (gap % step != 0)
        throw IngestError(id + ": timestamp not aligned to the raw step at row " +
                          std::to_string(i + 2) + " (" + format_timestamp_utc(ts[i]) + ")");
      const std::int64_t missing = gap / step - 1;
      if (missing > 0) {
        if (fill == FillPolicy::kNone)
          throw IngestError(id + ": " + std::to_string(missing) + " missing step(s) before " +
                            format_timestamp_utc(ts[i]) + " at row " + std::to_string(i + 2));
        for (std::int64_t g = 1; g <= missing; ++g) {
          fts.push_back(ts[i - 1] + g * step);
          if (fill == FillPolicy::kZero) {
            fv.push_back(0.0);
          } else {
            const double a = netload[i - 1], b = netload[i];
            fv.push_back(a + (b - a) * static_cast<double>(g) /
                                 static_cast<double>(missing + 1));
          }
          ++filled;
        }
      }
    }
    fts.push_back(ts[i]);
    fv.push_back(netload[i]);
  }

  // Trim partial leading/trailing hours, then sum per hour.
  const std::size_t per_hour = static_cast<std::size_t>(3600 / step);
  std::size_t begin = 0;
  while (begin < fts.size() && fts[begin] % 3600 != 0) ++begin;
  const std::size_t usable = (fts.size() - begin) / per_hour * per_hour;
  if (usable == 0) throw IngestError(id + ": fewer than one complete hour of data");

  SiteDataset out;
  out.id = id;
  out.raw_rows = usable;
  out.filled_steps = filled;
  for (std::size_t h = 0; h < usable / per_hour; ++h) {
    double sum = 0.0;
    for (std::size_t q = 0; q < per_hour; ++q) sum += fv[begin + h * per_hour + q];
    out.hourly.timestamps.push_back(fts[begin + h * per_hour]);
    out.hourly.values.push_back(sum);
    out.raw_netload_sum += sum;
  }
  out.hourly.validate();
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ConfigError("train fraction must be in (0, 1)");
  out.split = static_cast<std::size_t>(std::floor(train_fraction *
                                                  static_cast<double>(out.hourly.size())));
  return out;
}

}  // namespace

SiteDataset ingest_raw(const std::string& id, const RawSeries& raw, int raw_step_minutes,
                       ValueUnit unit, FillPolicy fill, double train_fraction) {
  if (raw.timestamps.size() != raw.load.size() || raw.load.size() != raw.pv.size())
    throw IngestError(id + ": raw series length mismatch");
  const double to_kwh =
      unit == ValueUnit::kKw ? static_cast<double>(raw_step_minutes) / 60.0 : 1.0;
  std::vector<double> netload(raw.load.size());
  for (std::size_t i = 0; i < netload.size(); ++i) {
    netload[i] = (raw.load[i] - raw.pv[i]) * to_kwh;
    if (!std::isfinite(netload[i]))
      throw IngestError(id + ": non-finite value at row " + std::to_string(i + 2));
  }
  return aggregate_hourly(id, raw.timestamps, std::move(netload), raw_step_minutes, fill,
                          train_fraction);
}

SiteDataset ingest(const IngestSpec& spec, double train_fraction) {
  std::ifstream in(spec.csv_path);
  if (!in) throw IngestError(spec.id + ": cannot open '" + spec.csv_path + "'");
  std::string line;
  if (!std::getline(in, line)) throw IngestError(spec.id + ": empty file");
  const auto header = split_csv_line(line);
  auto col_of = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw IngestError(spec.id + ": column '" + name + "' not found in header");
  };
  const std::size_t ci_ts = col_of(spec.columns.timestamp);
  const std::size_t ci_load = col_of(spec.columns.load);
  const std::size_t ci_pv = col_of(spec.columns.pv);

  RawSeries raw;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() <= std::max({ci_ts, ci_load, ci_pv}))
      throw IngestError(spec.id + ": too few fields at row " + std::to_string(row));
    try {
      raw.timestamps.push_back(parse_timestamp(fields[ci_ts]));
      raw.load.push_back(std::stod(fields[ci_load]));
      raw.pv.push_back(std::stod(fields[ci_pv]));
    } catch (const IngestError&) {
      throw;
    } catch (const std::exception&) {
      throw IngestError(spec.id + ": unparseable row " + std::to_string(row));
    }
  }
  return ingest_raw(spec.id, raw, spec.raw_step_minutes, spec.unit, spec.fill, train_fraction);
}

SiteConfig derive_site_config(const SiteDataset& dataset, const BatteryParams& battery,
                              const TariffTemplate& tariff, double dt_hours) {
  battery.validate();
  SiteConfig site;
  site.battery = battery;
  site.dt_hours = dt_hours;
  site.horizon = dataset.test_steps();
  for (int h = 0; h < 24; ++h) site.tariff.price_per_kwh[h] = tariff.peak_price;
  for (int h : tariff.offpeak_hours) {
    if (h < 0 || h >= 24) throw ConfigError("off-peak hour out of range");
    site.tariff.price_per_kwh[h] = tariff.offpeak_price;
  }
  site.tariff.overrun_penalty = tariff.overrun_penalty;
  const double peak =
      *std::max_element(dataset.hourly.values.begin(), dataset.hourly.values.end());
  site.tariff.subscribed_power = std::max(0.0, peak - battery.max_charge * dt_hours);
  site.validate();
  return site;
}

// ---- experiment configuration ----

namespace {

using nlohmann::json;
using ordered = nlohmann::ordered_json;

BatteryParams battery_from_json(const json& j) {
  BatteryParams b;
  b.capacity = j.at("capacity_kwh").get<double>();
  b.max_charge = j.at("max_charge_kw").get<double>();
  b.max_discharge = j.at("max_discharge_kw").get<double>();
  b.eff_charge = j.value("eff_charge", 1.0);
  b.eff_discharge = j.value("eff_discharge", 1.0);
  b.initial_soc = j.value("initial_soc_kwh", 0.0);
  b.validate();
  return b;
}

ordered battery_to_json(const BatteryParams& b) {
  ordered j;
  j["capacity_kwh"] = b.capacity;
  j["max_charge_kw"] = b.max_charge;
  j["max_discharge_kw"] = b.max_discharge;
  j["eff_charge"] = b.eff_charge;
  j["eff_discharge"] = b.eff_discharge;
  j["initial_soc_kwh"] = b.initial_soc;
  return j;
}

TreeMethod method_from_string(const std::string& s) {
  if (s == "averaged") return TreeMethod::kAveraged;
  if (s == "fan") return TreeMethod::kFan;
  if (s == "clustered-fan") return TreeMethod::kClusteredFan;
  if (s == "reduced") return TreeMethod::kReduced;
  throw ConfigError("unknown tree method '" + s + "'");
}

std::string method_to_string(TreeMethod m) {
  switch (m) {
    case TreeMethod::kAveraged: return "averaged";
    case TreeMethod::kFan: return "fan";
    case TreeMethod::kClusteredFan: return "clustered-fan";
    case TreeMethod::kReduced: return "reduced";
  }
  return "fan";
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  const json doc = json::parse(text);
  ExperimentConfig cfg;
  cfg.seed = doc.value("seed", 1ULL);
  cfg.parallelism = doc.value("parallelism", 1);
  cfg.solver_time_limit_seconds = doc.value("solver_time_limit_seconds", 5.0);
  cfg.train_fraction = doc.value("train_fraction", 0.6);
  if (doc.contains("battery")) cfg.battery = battery_from_json(doc.at("battery"));
  if (doc.contains("tariff")) {
    const auto& t = doc.at("tariff");
    cfg.tariff.offpeak_price = t.value("offpeak_price", cfg.tariff.offpeak_price);
    cfg.tariff.peak_price = t.value("peak_price", cfg.tariff.peak_price);
    cfg.tariff.overrun_penalty = t.value("overrun_penalty", cfg.tariff.overrun_penalty);
    if (t.contains("offpeak_hours"))
      cfg.tariff.offpeak_hours = t.at("offpeak_hours").get<std::vector<int>>();
  }
  if (doc.contains("sampler")) {
    const auto& s = doc.at("sampler");
    cfg.sampler.lags = s.value("lags", cfg.sampler.lags);
    cfg.sampler.horizon = s.value("horizon", cfg.sampler.horizon);
    cfg.sampler.neighbors = s.value("neighbors", cfg.sampler.neighbors);
  }
  if (doc.contains("algorithms"))
    cfg.algorithms = doc.at("algorithms").get<std::vector<std::string>>();
  if (doc.contains("challengers")) {
    for (const auto& [name, j] : doc.at("challengers").items()) {
      ChallengerConfig c = ChallengerConfig::defaults(name);
      if (j.contains("method")) c.method = method_from_string(j.at("method").get<std::string>());
      c.samples = j.value("samples", c.samples);
      c.clusters = j.value("clusters", c.clusters);
      c.eps_construction = j.value("eps_construction", c.eps_construction);
      c.eps_reduction = j.value("eps_reduction", c.eps_reduction);
      cfg.challengers[name] = c;
    }
  }
  if (doc.contains("sites")) {
    for (const auto& j : doc.at("sites")) {
      SiteSpec s;
      s.ingest.id = j.at("id").get<std::string>();
      s.ingest.csv_path = j.value("csv", "");
      if (j.contains("columns")) {
        const auto& c = j.at("columns");
        s.ingest.columns.timestamp = c.value("timestamp", s.ingest.columns.timestamp);
        s.ingest.columns.load = c.value("load", s.ingest.columns.load);
        s.ingest.columns.pv = c.value("pv", s.ingest.columns.pv);
      }
      s.ingest.raw_step_minutes = j.value("raw_step_minutes", 15);
      const std::string unit = j.value("unit", "kwh");
      if (unit == "kwh")
        s.ingest.unit = ValueUnit::kKwhPerStep;
      else if (unit == "kw")
        s.ingest.unit = ValueUnit::kKw;
      else
        throw ConfigError("unknown unit '" + unit + "'");
      const std::string fill = j.value("fill", "none");
      if (fill == "none")
        s.ingest.fill = FillPolicy::kNone;
      else if (fill == "zero")
        s.ingest.fill = FillPolicy::kZero;
      else if (fill == "interpolate")
        s.ingest.fill = FillPolicy::kInterpolate;
      else
        throw ConfigError("unknown fill policy '" + fill + "'");
      if (j.contains("battery")) s.battery = battery_from_json(j.at("battery"));
      cfg.sites.push_back(std::move(s));
    }
  }
  if (doc.contains("trajectory_sites"))
    cfg.trajectory_sites = doc.at("trajectory_sites").get<std::vector<std::string>>();
  return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

std::string ExperimentConfig::to_json() const {
  ordered doc;
  doc["seed"] = seed;
  doc["parallelism"] = parallelism;
  doc["solver_time_limit_seconds"] = solver_time_limit_seconds;
  doc["train_fraction"] = train_fraction;
  doc["battery"] = battery_to_json(battery);
  ordered t;
  t["offpeak_price"] = tariff.offpeak_price;
  t["peak_price"] = tariff.peak_price;
  t["offpeak_hours"] = tariff.offpeak_hours;
  t["overrun_penalty"] = tariff.overrun_penalty;
  doc["tariff"] = t;
  ordered s;
  s["lags"] = sampler.lags;
  s["horizon"] = sampler.horizon;
  s["neighbors"] = sampler.neighbors;
  doc["sampler"] = s;
  doc["algorithms"] = algorithms;
  ordered ch;
  for (const auto& [name, c] : challengers) {
    ordered j;
    j["method"] = method_to_string(c.method);
    j["samples"] = c.samples;
    j["clusters"] = c.clusters;
    j["eps_construction"] = c.eps_construction;
    j["eps_reduction"] = c.eps_reduction;
    ch[name] = j;
  }
  doc["challengers"] = ch;
  doc["sites"] = ordered::array();
  for (const auto& site : sites) {
    ordered j;
    j["id"] = site.ingest.id;
    j["csv"] = site.ingest.csv_path;
    ordered c;
    c["timestamp"] = site.ingest.columns.timestamp;
    c["load"] = site.ingest.columns.load;
    c["pv"] = site.ingest.columns.pv;
    j["columns"] = c;
    j["raw_step_minutes"] = site.ingest.raw_step_minutes;
    j["unit"] = site.ingest.unit == ValueUnit::kKw ? "kw" : "kwh";
    j["fill"] = site.ingest.fill == FillPolicy::kNone
                    ? "none"
                    : (site.ingest.fill == FillPolicy::kZero ? "zero" : "interpolate");
    if (site.battery) j["battery"] = battery_to_json(*site.battery);
    doc["sites"].push_back(j);
  }
  doc["trajectory_sites"] = trajectory_sites;
  return doc.dump(2);
}

ChallengerConfig ExperimentConfig::challenger(const std::string& algorithm) const {
  ChallengerConfig c;
  const auto it = challengers.find(algorithm);
  if (it != challengers.end())
    c = it->second;
  else if (is_challenger(algorithm))
    c = ChallengerConfig::defaults(algorithm);
  c.sampler = sampler;
  c.milp.time_limit_seconds = solver_time_limit_seconds;
  return c;
}

// ---- synthetic sites ----

RawSeries generate_synthetic_site(const SynthSpec& spec) {
  // Three profiles: office-like, industrial with midday PV, residential-ish.
  const int profile = ((spec.site_index % 3) + 3) % 3;
  const double base[3] = {22.0, 45.0, 9.0};
  const double day_amp[3] = {14.0, 18.0, 6.0};
  const double evening_amp[3] = {10.0, 4.0, 7.0};
  const double pv_peak[3] = {6.0, 30.0, 3.0};
  const double noise_sd[3] = {2.2, 3.5, 1.2};

  const std::int64_t step = static_cast<std::int64_t>(spec.raw_step_minutes) * 60;
  const std::size_t n = static_cast<std::size_t>(spec.days) * 86400 / step;
  std::mt19937_64 rng(derive_seed(spec.seed, static_cast<std::uint64_t>(spec.site_index)));

  RawSeries raw;
  raw.timestamps.reserve(n);
  raw.load.reserve(n);
  raw.pv.reserve(n);
  double ar = 0.0;  // AR(1) noise state, in kW
  const double two_pi = 6.283185307179586;
  for (std::size_t i = 0; i < n; ++i) {
    const std::int64_t ts = spec.start_epoch + static_cast<std::int64_t>(i) * step;
    const double hour = static_cast<double>(ts % 86400) / 3600.0;
    const double dow = static_cast<double>((ts / 86400 + 4) % 7);  // 0 = Thursday epoch
    const double weekend = (dow == 5.0 || dow == 6.0) ? 0.75 : 1.0;

    double kw = base[profile];
    kw += day_amp[profile] * std::max(0.0, std::sin(two_pi * (hour - 6.5) / 24.0));
    kw += evening_amp[profile] * std::exp(-0.5 * std::pow((hour - 19.0) / 1.8, 2));
    kw *= weekend;
    // Smooth noise so adjacent quarters stay correlated.
    const double g1 = uniform01(rng), g2 = uniform01(rng);
    const double gauss =
        std::sqrt(-2.0 * std::log(std::max(g1, 1e-300))) * std::cos(two_pi * g2);
    ar = 0.92 * ar + noise_sd[profile] * gauss;
    kw += ar;
    kw = std::max(0.5, kw);

    double pv = 0.0;
    if (hour >= 6.0 && hour <= 18.0) {
      const double season =
          0.75 + 0.25 * std::sin(two_pi * static_cast<double>(ts % 31557600) / 31557600.0);
      pv = pv_peak[profile] * std::pow(std::sin(two_pi * (hour - 6.0) / 24.0), 1.5) * season;
      const double cloud = 0.7 + 0.3 * uniform01(rng);
      pv *= cloud;
    }

    const double step_h = static_cast<double>(spec.raw_step_minutes) / 60.0;
    raw.timestamps.push_back(ts);
    raw.load.push_back(kw * step_h);
    raw.pv.push_back(pv * step_h);
  }
  return raw;
}

void write_site_csv(const RawSeries& raw, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestError("cannot write '" + path + "'");
  out << "timestamp,load_kwh,pv_kwh\n";
  char buf[32];
  auto shortest = [&buf](double v) {
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
  };
  for (std::size_t i = 0; i < raw.timestamps.size(); ++i)
    out << format_timestamp_utc(raw.timestamps[i]) << ',' << shortest(raw.load[i]) << ','
        << shortest(raw.pv[i]) << '\n';
}

}  // namespace mgbench
