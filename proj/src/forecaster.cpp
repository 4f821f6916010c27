#include "savi/forecaster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace savi {

namespace {

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) {
    out[i] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return out;
}

}  // namespace

std::vector<double> default_model_grid(double q) { return linspace(0.05, q - 0.05, 8); }

std::vector<double> default_auditor_grid(double q) { return linspace(q + 0.02, 0.99, 4); }

ForecastGrid::ForecastGrid(Side side, std::vector<double> grid, double q, double learning_rate)
    : ForecastGrid(side, grid, std::vector<double>(grid.size(), 1.0), q, learning_rate) {}

ForecastGrid::ForecastGrid(Side side, std::vector<double> grid, std::vector<double> weights,
                           double q, double learning_rate)
    : side_(side), q_(q), learning_rate_(learning_rate), grid_(std::move(grid)) {
  if (grid_.empty()) throw ConfigError("forecast grid must not be empty");
  if (weights.size() != grid_.size()) throw ConfigError("forecast weights/grid size mismatch");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("forecast learning rate must be a finite nonnegative number");
  }
  for (double g : grid_) {
    if (!(g > 0.0 && g < 1.0)) throw ConfigError("forecast grid point outside (0,1)");
    if (side_ == Side::Model && !(g < q_)) {
      throw ConfigError("model-side grid points must lie below q");
    }
    if (side_ == Side::Auditor && !(g >= q_)) {
      throw ConfigError("auditor-side grid points must lie at or above q");
    }
  }
  log_weights_.reserve(weights.size());
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("forecast weights must be nonnegative");
    log_weights_.push_back(std::log(w));
  }
  normalize();
}

ForecastGrid ForecastGrid::from_settings(Side side, const ForecastSettings& settings, double q) {
  const auto& custom = side == Side::Model ? settings.model_grid : settings.auditor_grid;
  std::vector<double> grid =
      !custom.empty() ? custom : (side == Side::Model ? default_model_grid(q) : default_auditor_grid(q));
  return ForecastGrid(side, std::move(grid), q, settings.learning_rate);
}

double ForecastGrid::predict() const {
  double acc = 0.0;
  for (std::size_t b = 0; b < grid_.size(); ++b) acc += std::exp(log_weights_[b]) * grid_[b];
  // Rounding may leave the average a hair outside the grid's hull.
  const auto [lo, hi] = std::minmax_element(grid_.begin(), grid_.end());
  return std::clamp(acc, *lo, *hi);
}

void ForecastGrid::update(Score y) {
  for (std::size_t b = 0; b < grid_.size(); ++b) {
    if (learning_rate_ == 0.0) break;
    log_weights_[b] += learning_rate_ * step_log_ratio(y, grid_[b], q_);
  }
  normalize();
}

std::vector<double> ForecastGrid::weights() const {
  std::vector<double> out;
  out.reserve(log_weights_.size());
  for (double lw : log_weights_) out.push_back(std::exp(lw));
  return out;
}

void ForecastGrid::normalize() {
  const double hi = *std::max_element(log_weights_.begin(), log_weights_.end());
  if (hi == -std::numeric_limits<double>::infinity()) {
    throw ConfigError("forecast weights must not all be zero");
  }
  double total = 0.0;
  for (double& lw : log_weights_) {
    lw -= hi;
    total += std::exp(lw);
  }
  const double log_total = std::log(total);
  for (double& lw : log_weights_) lw -= log_total;
}

}  // namespace savi
