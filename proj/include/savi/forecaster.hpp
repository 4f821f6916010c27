#ifndef SAVI_FORECASTER_HPP
#define SAVI_FORECASTER_HPP

#include <vector>

#include "savi/config.hpp"
#include "savi/eprocess.hpp"

namespace savi {

/// Grid and learning rate for the exponentially weighted averaging
/// forecasters. An empty grid selects the default grid for that side.
struct ForecastSettings {
  double learning_rate = 1.0;
  std::vector<double> model_grid;
  std::vector<double> auditor_grid;
};

/// Default model-side grid: 8 points equally spaced in [0.05, q - 0.05].
std::vector<double> default_model_grid(double q);
/// Default auditor-side grid: 4 points equally spaced in [q + 0.02, 0.99].
std::vector<double> default_auditor_grid(double q);

/**
 * Exponentially weighted averaging forecaster over a fixed grid of candidate
 * alternative probabilities.
 *
 * The prediction is the weight-averaged grid value. After each score y the
 * weight of candidate b is multiplied by exp(lambda * log(p(y; q_b) / p(y; q)))
 * and renormalised. Weights are held as normalised log-weights so that long
 * runs cannot underflow a candidate to an unrecoverable zero.
 */
class ForecastGrid {
 public:
  /// Uniform initial weights. Throws ConfigError if a grid point is outside
  /// (0,1) or on the wrong side of q (model: < q, auditor: >= q), or if the
  /// learning rate is negative.
  ForecastGrid(Side side, std::vector<double> grid, double q, double learning_rate = 1.0);

  ForecastGrid(Side side, std::vector<double> grid, std::vector<double> weights, double q,
               double learning_rate = 1.0);

  static ForecastGrid from_settings(Side side, const ForecastSettings& settings, double q);

  /// Weighted average of the grid; always inside [min grid, max grid].
  double predict() const;

  /// predict() clamped to the side's admissible forecast range.
  double predict_clamped() const { return clamp_forecast(side_, predict(), q_); }

  void update(Score y);

  std::vector<double> weights() const;
  const std::vector<double>& grid() const noexcept { return grid_; }
  Side side() const noexcept { return side_; }
  double learning_rate() const noexcept { return learning_rate_; }

 private:
  void normalize();

  Side side_;
  double q_;
  double learning_rate_;
  std::vector<double> grid_;
  std::vector<double> log_weights_;
};

/// Value-semantics form of ForecastGrid::update.
inline ForecastGrid ewaf_update(ForecastGrid grid, Score y) {
  grid.update(y);
  return grid;
}

inline double predict(const ForecastGrid& grid) { return grid.predict(); }

}  // namespace savi

#endif  // SAVI_FORECASTER_HPP
