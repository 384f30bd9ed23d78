#include "mgbench/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mgbench/rng.hpp"

namespace mgbench {

void SamplerConfig::validate() const {
  if (lags < 1) throw ConfigError("sampler: lags must be >= 1");
  if (horizon < 1) throw ConfigError("sampler: horizon must be >= 1");
  if (neighbors < 1) throw ConfigError("sampler: neighbors must be >= 1");
}

AnalogModel AnalogModel::fit(const NetloadSeries& training, const SamplerConfig& cfg) {
  training.validate();
  return fit(std::span<const double>(training.values), cfg);
}

AnalogModel AnalogModel::fit(std::span<const double> training, const SamplerConfig& cfg) {
  cfg.validate();
  const std::size_t lags = cfg.lags;
  const std::size_t cont = cfg.horizon + 1;
  if (training.size() < lags + cont)
    throw ConfigError("analog model: training series shorter than lags + horizon + 1");

  AnalogModel m;
  m.cfg_ = cfg;
  m.pairs_ = training.size() - lags - cfg.horizon;
  m.train_min_ = *std::min_element(training.begin(), training.end());
  m.train_max_ = *std::max_element(training.begin(), training.end());

  // Per-lag-position statistics over all stored windows.
  m.mean_.assign(lags, 0.0);
  m.scale_.assign(lags, 1.0);
  for (std::size_t j = 0; j < lags; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.pairs_; ++i) s += training[i + j];
    m.mean_[j] = s / static_cast<double>(m.pairs_);
    double v = 0.0;
    for (std::size_t i = 0; i < m.pairs_; ++i) {
      const double d = training[i + j] - m.mean_[j];
      v += d * d;
    }
    const double sd = std::sqrt(v / static_cast<double>(m.pairs_));
    m.scale_[j] = sd > 0.0 ? sd : 1.0;
  }

  m.windows_.resize(m.pairs_ * lags);
  m.continuations_.resize(m.pairs_ * cont);
  m.window_end_.resize(m.pairs_);
  for (std::size_t i = 0; i < m.pairs_; ++i) {
    for (std::size_t j = 0; j < lags; ++j)
      m.windows_[i * lags + j] = (training[i + j] - m.mean_[j]) / m.scale_[j];
    for (std::size_t j = 0; j < cont; ++j)
      m.continuations_[i * cont + j] = training[i + lags + j];
    m.window_end_[i] = training[i + lags - 1];
  }
  return m;
}

ScenarioMatrix AnalogModel::sample(const History& h, std::size_t count, std::size_t horizon,
                                   std::uint64_t seed) const {
  if (pairs_ == 0) throw ConfigError("analog model: not fitted");
  if (count < 1) throw ConfigError("analog model: sample count must be >= 1");
  if (horizon < 1 || horizon > cfg_.horizon)
    throw ConfigError("analog model: horizon outside [1, fitted horizon]");
  if (h.size() < cfg_.lags) throw ConfigError("analog model: history shorter than lag window");

  const std::size_t lags = cfg_.lags;
  const auto recent = h.last_n(lags);
  std::vector<double> query(lags);
  for (std::size_t j = 0; j < lags; ++j) query[j] = (recent[j] - mean_[j]) / scale_[j];

  // Nearest stored windows by Euclidean distance, ties toward lower index.
  std::vector<std::size_t> order(pairs_);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> d2(pairs_);
  for (std::size_t i = 0; i < pairs_; ++i) {
    double s = 0.0;
    const double* w = &windows_[i * lags];
    for (std::size_t j = 0; j < lags; ++j) {
      const double d = query[j] - w[j];
      s += d * d;
    }
    d2[i] = s;
  }
  const std::size_t k = std::min(cfg_.neighbors, pairs_);
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (d2[a] != d2[b]) return d2[a] < d2[b];
                      return a < b;
                    });

  std::vector<double> dist(k);
  for (std::size_t i = 0; i < k; ++i) dist[i] = std::sqrt(d2[order[i]]);

  // Gaussian kernel weights with bandwidth = median neighbor distance; with
  // exact duplicates (zero bandwidth), fall back to uniform weights over the
  // zero-distance neighbors.
  const double sigma = dist[(k - 1) / 2];
  std::vector<double> weight(k);
  if (sigma > 0.0) {
    for (std::size_t i = 0; i < k; ++i)
      weight[i] = std::exp(-dist[i] * dist[i] / (2.0 * sigma * sigma));
  } else {
    for (std::size_t i = 0; i < k; ++i) weight[i] = dist[i] == 0.0 ? 1.0 : 0.0;
  }
  double total = 0.0;
  for (double w : weight) total += w;

  std::mt19937_64 rng(seed);
  const std::size_t cont = cfg_.horizon + 1;
  const double w_last = h.last();

  ScenarioMatrix out;
  out.rows = count;
  out.cols = horizon;
  out.values.resize(count * horizon);
  for (std::size_t s = 0; s < count; ++s) {
    const double u = uniform01(rng) * total;
    double acc = 0.0;
    std::size_t pick = k - 1;
    for (std::size_t i = 0; i < k; ++i) {
      acc += weight[i];
      if (u < acc) {
        pick = i;
        break;
      }
    }
    const std::size_t idx = order[pick];
    const double shift = w_last - window_end_[idx];
    for (std::size_t j = 0; j < horizon; ++j)
      out.values[s * horizon + j] = continuations_[idx * cont + j] + shift;
  }
  return out;
}

}  // namespace mgbench
