#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "helpers.hpp"
#include "mgbench/rng.hpp"
#include "mgbench/sampler.hpp"

using namespace mgbench;
using namespace mgbench::testing;

namespace {

SamplerConfig small_cfg(std::size_t lags, std::size_t horizon, std::size_t neighbors) {
  SamplerConfig c;
  c.lags = lags;
  c.horizon = horizon;
  c.neighbors = neighbors;
  return c;
}

std::vector<double> ramp(std::size_t n, double slope = 1.0, double offset = 0.0) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = offset + slope * static_cast<double>(i);
  return v;
}

}  // namespace

TEST_CASE("fit: stored pair counts") {
  auto cfg = small_cfg(48, 5, 3);
  // Exactly one sliding position.
  CHECK(AnalogModel::fit(std::span<const double>(ramp(54)), cfg).pair_count() == 1);
  // Hand count on a length-60 series: 60 - 48 - 5 = 7.
  CHECK(AnalogModel::fit(std::span<const double>(ramp(60)), cfg).pair_count() == 7);
  CHECK_THROWS_AS(AnalogModel::fit(std::span<const double>(ramp(53)), cfg), ConfigError);
}

TEST_CASE("fit: constant series produces identical continuations") {
  auto cfg = small_cfg(4, 3, 2);
  std::vector<double> train(40, 7.5);
  const auto model = AnalogModel::fit(std::span<const double>(train), cfg);
  std::vector<double> hist(6, 7.5);
  History h(hist, 5);
  const auto s = model.sample(h, 5, 3, 123);
  for (double v : s.values) CHECK(v == doctest::Approx(7.5));
}

TEST_CASE("sample: exact window match replays its continuation") {
  auto cfg = small_cfg(6, 4, 1);
  std::mt19937_64 rng(3);
  std::vector<double> train(40);
  for (auto& v : train) v = uniform_range(rng, -5, 15);
  const auto model = AnalogModel::fit(std::span<const double>(train), cfg);
  // History ending exactly like the window starting at offset 10.
  std::vector<double> hist(train.begin() + 10, train.begin() + 16);
  History h(hist, hist.size() - 1);
  const auto s = model.sample(h, 3, 4, 99);
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 4; ++c)
      CHECK(s.at(r, c) == doctest::Approx(train[16 + c]).epsilon(1e-12));
}

TEST_CASE("sample: deterministic for a fixed seed, different across seeds") {
  auto cfg = small_cfg(8, 5, 10);
  std::mt19937_64 rng(4);
  std::vector<double> train(200);
  for (auto& v : train) v = uniform_range(rng, 0, 30);
  const auto model = AnalogModel::fit(std::span<const double>(train), cfg);
  std::vector<double> hist(train.begin() + 50, train.begin() + 70);
  History h(hist, hist.size() - 1);
  const auto a = model.sample(h, 7, 5, 42);
  const auto b = model.sample(h, 7, 5, 42);
  CHECK(a.values == b.values);
  const auto c = model.sample(h, 7, 5, 43);
  CHECK(a.values != c.values);
}

TEST_CASE("sample: values stay inside the level-corrected training range") {
  auto cfg = small_cfg(8, 6, 12);
  std::mt19937_64 rng(5);
  std::vector<double> train(300);
  for (auto& v : train) v = uniform_range(rng, -10, 25);
  const auto model = AnalogModel::fit(std::span<const double>(train), cfg);

  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> hist(20);
    for (auto& v : hist) v = uniform_range(rng, -10, 25);
    History h(hist, hist.size() - 1);
    const auto s = model.sample(h, 10, 6, 1000 + trial);
    // The shift is bounded by |last observed - window end| over stored
    // windows; bound it loosely by the training span plus history span.
    const double span = 35.0 + 35.0;
    for (double v : s.values) {
      CHECK(v >= model.train_min() - span);
      CHECK(v <= model.train_max() + span);
    }
    // Continuity: every scenario's own shift keeps step values within the
    // training range offset by that shift; verified via the public bound.
  }
}

TEST_CASE("sample: uniform weights over many neighbors approach the climatology") {
  // Constant-ish series with a linear trend removed: with neighbors = all
  // pairs and a flat history, the ensemble mean approaches the training mean
  // plus the level shift.
  auto cfg = small_cfg(4, 2, 1000000);  // more neighbors than pairs = use all
  std::vector<double> train;
  for (int i = 0; i < 200; ++i) train.push_back(10.0 + ((i % 2) ? 1.0 : -1.0));
  const auto model = AnalogModel::fit(std::span<const double>(train), cfg);
  std::vector<double> hist = {9.0, 11.0, 9.0, 11.0};
  History h(hist, 3);
  const auto s = model.sample(h, 4000, 2, 7);
  double mean = 0.0;
  for (double v : s.values) mean += v;
  mean /= static_cast<double>(s.values.size());
  // Window ends alternate 9/11-like; the climatological mean is 10 and the
  // level shift is bounded by 1 either way.
  CHECK(mean > 8.5);
  CHECK(mean < 11.5);
}

TEST_CASE("sample: history shorter than the lag window fails") {
  auto cfg = small_cfg(8, 3, 2);
  const auto model = AnalogModel::fit(std::span<const double>(ramp(40)), cfg);
  std::vector<double> hist(5, 1.0);
  History h(hist, 4);
  CHECK_THROWS_AS(model.sample(h, 2, 3, 1), ConfigError);
}

TEST_CASE("sample: truncated horizons for the end of a simulation") {
  auto cfg = small_cfg(6, 8, 4);
  const auto model = AnalogModel::fit(std::span<const double>(ramp(100)), cfg);
  std::vector<double> hist = ramp(10, 1.0, 20.0);
  History h(hist, 9);
  const auto full = model.sample(h, 3, 8, 11);
  const auto cut = model.sample(h, 3, 2, 11);
  CHECK(cut.cols == 2);
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 2; ++c) CHECK(cut.at(r, c) == full.at(r, c));
  CHECK_THROWS_AS(model.sample(h, 3, 9, 11), ConfigError);
}
