// Independent reference computations used only by the tests. Nothing here
// calls into the log-domain update code it is used to check.
#ifndef SAVI_TESTS_ORACLES_HPP
#define SAVI_TESTS_ORACLES_HPP

#include <cmath>
#include <cstddef>
#include <vector>

namespace savi::oracle {

inline double pmf(int y, double gamma) { return y == 1 ? gamma : 1.0 - gamma; }

/// Direct product of pmf ratios p(y; alt_k) / p(y; q).
inline double lr_product(const std::vector<int>& ys, const std::vector<double>& alts, double q) {
  double w = 1.0;
  for (std::size_t k = 0; k < ys.size(); ++k) w *= pmf(ys[k], alts[k]) / pmf(ys[k], q);
  return w;
}

/// Explicit double sum over every changepoint j <= t:
///   sum_j w_j prod_{k=j}^t factors[k].
inline double sr_brute_force(const std::vector<double>& factors, double rho) {
  double total = 0.0;
  for (std::size_t j = 0; j < factors.size(); ++j) {
    double w = (1.0 - rho) * std::pow(rho, static_cast<double>(j));
    for (std::size_t k = j; k < factors.size(); ++k) w *= factors[k];
    total += w;
  }
  return total;
}

inline double relative_error(double a, double b) {
  return std::abs(a - b) / std::max(std::abs(b), 1e-300);
}

}  // namespace savi::oracle

#endif  // SAVI_TESTS_ORACLES_HPP
