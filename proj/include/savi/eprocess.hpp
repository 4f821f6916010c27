#ifndef SAVI_EPROCESS_HPP
#define SAVI_EPROCESS_HPP

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>

#include "savi/config.hpp"

namespace savi {

/// The four e-process constructions. SR variants are Shiryaev-Roberts
/// mixtures of the corresponding likelihood-ratio process.
enum class Variant { LR, LR_UI, SR_LR, SR_LR_UI };

/// Which null a process tests: "no failure mode exists" (Model) or
/// "this audit strategy will find one" (Auditor).
enum class Side { Model, Auditor };

std::string_view to_string(Variant v) noexcept;
std::string_view to_string(Side s) noexcept;
/// Accepts "LR", "LR-UI", "SR-LR", "SR-LR-UI". Throws ConfigError otherwise.
Variant parse_variant(std::string_view name);

constexpr bool is_sr(Variant v) noexcept { return v == Variant::SR_LR || v == Variant::SR_LR_UI; }
constexpr bool uses_forecast(Variant v) noexcept {
  return v == Variant::LR_UI || v == Variant::SR_LR_UI;
}

// Forecasts are clamped into [kForecastMin, q - kForecastMargin] on the model
// side and [q + kForecastMargin, kForecastMax] on the auditor side.
inline constexpr double kForecastMargin = 1e-3;
inline constexpr double kForecastMin = 1e-3;
inline constexpr double kForecastMax = 1.0 - 1e-3;

double clamp_forecast(Side side, double gamma, double q) noexcept;

/**
 * Running state of one e-process, kept in the natural-log domain.
 *
 * For LR and LR-UI, log_wealth is the running sum of per-step log likelihood
 * ratios. For SR variants, log_sr_accumulator holds log A_t where
 * A_t = L_t * (A_{t-1} + w_t) and A_0 = 0; once at least one factor has been
 * applied, log_wealth equals log_sr_accumulator. Before that the wealth is 1
 * by the E_0 = 1 convention.
 *
 * Auditor-side processes stay at log_wealth == 0 exactly until step m.
 */
struct EProcessState {
  Variant variant = Variant::LR;
  Side side = Side::Model;
  double log_wealth = 0.0;
  double log_sr_accumulator = -std::numeric_limits<double>::infinity();
  std::int64_t step_count = 0;
  std::int64_t next_weight_index = 1;
  bool active = true;

  static EProcessState initial(Variant variant, Side side) noexcept;

  double wealth() const;
};

/// log p(y; gamma) for a Bernoulli(gamma) score. gamma must be in (0,1).
double bernoulli_log_pmf(Score y, double gamma);

/// log p(y; alt) - log p(y; q).
double step_log_ratio(Score y, double alt, double q);

/// log w_j for the geometric changepoint weights w_j = (1-rho) rho^(j-1).
double sr_log_weight(std::int64_t j, double rho);

/// Fixed-alternative model-side update with alternative q - delta.
EProcessState lr_model_update(EProcessState state, Score y, const AuditConfig& cfg);

/// Universal-inference model-side update. gamma_hat must have been fixed
/// before y was revealed and must lie in (0, q).
EProcessState lr_ui_model_update(EProcessState state, Score y, double gamma_hat,
                                 const AuditConfig& cfg);

/// Shiryaev-Roberts recursion for the model side, given the log of the
/// per-step factor used by the underlying LR or LR-UI process.
EProcessState sr_update(EProcessState state, double log_factor, const AuditConfig& cfg);

/// Fixed-alternative auditor-side update with alternative q + delta_prime.
/// Wealth is frozen at 1 for steps t < m.
EProcessState lr_auditor_update(EProcessState state, Score y, const AuditConfig& cfg);

/// Universal-inference auditor-side update; gamma_hat must lie in [q, 1)
/// once the process is active.
EProcessState lr_ui_auditor_update(EProcessState state, Score y, double gamma_hat,
                                   const AuditConfig& cfg);

/// Shiryaev-Roberts recursion for the auditor side. Weight indexing starts
/// at w_1 on step m.
EProcessState sr_auditor_update(EProcessState state, double log_factor,
                                const AuditConfig& cfg);

/// Applies the update rule matching state.variant and state.side.
/// gamma_hat is required for UI variants (already clamped by the caller).
EProcessState advance(EProcessState state, Score y, std::optional<double> gamma_hat,
                      const AuditConfig& cfg);

}  // namespace savi

#endif  // SAVI_EPROCESS_HPP
