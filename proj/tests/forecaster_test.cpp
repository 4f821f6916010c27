#include <numeric>
#include <random>

#include "doctest.h"
#include "savi/forecaster.hpp"

using namespace savi;

namespace {
constexpr double kQ = 0.85;

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }
}  // namespace

TEST_CASE("predict is the weighted grid average") {
  CHECK(ForecastGrid(Side::Model, {0.5, 0.7}, kQ).predict() == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(ForecastGrid(Side::Model, {0.5, 0.7}, {1.0, 0.0}, kQ).predict() == 0.5);
  CHECK(ForecastGrid(Side::Model, {0.5, 0.7}, {0.625, 0.375}, kQ).predict() ==
        doctest::Approx(0.575).epsilon(1e-15));
}

TEST_CASE("one failure moves uniform weights to (0.625, 0.375)") {
  // Unnormalised: 0.5 * (0.5/0.15) = 1.6667 and 0.5 * (0.3/0.15) = 1.0.
  ForecastGrid g(Side::Model, {0.5, 0.7}, kQ, 1.0);
  g = ewaf_update(g, Score(false));
  const auto w = g.weights();
  CHECK(w[0] == doctest::Approx(0.625).epsilon(1e-14));
  CHECK(w[1] == doctest::Approx(0.375).epsilon(1e-14));
  CHECK(predict(g) == doctest::Approx(0.575).epsilon(1e-14));
}

TEST_CASE("zero learning rate freezes the weights") {
  ForecastGrid g(Side::Model, {0.5, 0.7}, {0.3, 0.7}, kQ, 0.0);
  g.update(Score(false));
  g.update(Score(true));
  CHECK(g.weights()[0] == doctest::Approx(0.3).epsilon(1e-14));
}

TEST_CASE("repeated failures concentrate on the lower candidate monotonically") {
  ForecastGrid g(Side::Model, {0.5, 0.7}, kQ);
  double previous = g.weights()[0];
  for (int i = 0; i < 10; ++i) {
    g.update(Score(false));
    const double w = g.weights()[0];
    REQUIRE(w > previous);
    previous = w;
  }
  // After 10 failures the odds are (0.5/0.3)^10 = 165.4 : 1.
  CHECK(previous == doctest::Approx(165.3817 / 166.3817).epsilon(1e-6));
}

TEST_CASE("weights stay normalised and predictions stay on their side") {
  std::mt19937_64 gen(11);
  for (Side side : {Side::Model, Side::Auditor}) {
    for (double lr : {0.5, 1.0, 3.0}) {
      ForecastSettings fs;
      fs.learning_rate = lr;
      ForecastGrid g = ForecastGrid::from_settings(side, fs, kQ);
      for (int t = 0; t < 2000; ++t) {
        g.update(Score(gen() % 5 != 0));
        REQUIRE(sum(g.weights()) == doctest::Approx(1.0).epsilon(1e-12));
        const double p = g.predict_clamped();
        if (side == Side::Model) {
          REQUIRE(p < kQ);
          REQUIRE(p > 0.0);
        } else {
          REQUIRE(p > kQ);
          REQUIRE(p < 1.0);
        }
      }
    }
  }
}

TEST_CASE("a candidate that wins every round keeps the larger weight") {
  // Under all-failure data the lowest model-side candidate has the largest
  // log-ratio on every observation, so weights are ordered by candidate.
  std::mt19937_64 gen(5);
  ForecastGrid g(Side::Model, default_model_grid(kQ), kQ);
  for (int t = 0; t < 50; ++t) {
    g.update(Score(false));
    const auto w = g.weights();
    for (std::size_t b = 1; b < w.size(); ++b) REQUIRE(w[b - 1] >= w[b]);
  }
  // Under all-pass data on the auditor side the highest candidate wins.
  ForecastGrid a(Side::Auditor, default_auditor_grid(kQ), kQ);
  for (int t = 0; t < 50; ++t) {
    a.update(Score(true));
    const auto w = a.weights();
    for (std::size_t b = 1; b < w.size(); ++b) REQUIRE(w[b - 1] <= w[b]);
  }
}

TEST_CASE("default grids") {
  const auto m = default_model_grid(kQ);
  REQUIRE(m.size() == 8);
  CHECK(m.front() == doctest::Approx(0.05));
  CHECK(m.back() == doctest::Approx(0.80));
  const auto a = default_auditor_grid(kQ);
  REQUIRE(a.size() == 4);
  CHECK(a.front() == doctest::Approx(0.87));
  CHECK(a.back() == doctest::Approx(0.99));
}

TEST_CASE("invalid grids are rejected") {
  CHECK_THROWS_AS(ForecastGrid(Side::Model, {0.5, 0.9}, kQ), ConfigError);
  CHECK_THROWS_AS(ForecastGrid(Side::Auditor, {0.8}, kQ), ConfigError);
  CHECK_THROWS_AS(ForecastGrid(Side::Model, {0.0, 0.5}, kQ), ConfigError);
  CHECK_THROWS_AS(ForecastGrid(Side::Model, {}, kQ), ConfigError);
  CHECK_THROWS_AS(ForecastGrid(Side::Model, {0.5}, kQ, -1.0), ConfigError);
  CHECK_THROWS_AS(ForecastGrid(Side::Model, {0.5, 0.6}, {0.0, 0.0}, kQ), ConfigError);
}
