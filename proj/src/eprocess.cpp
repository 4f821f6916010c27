#include "savi/eprocess.hpp"

#include <algorithm>
#include <cmath>

namespace savi {

std::string_view to_string(Variant v) noexcept {
  switch (v) {
    case Variant::LR: return "LR";
    case Variant::LR_UI: return "LR-UI";
    case Variant::SR_LR: return "SR-LR";
    case Variant::SR_LR_UI: return "SR-LR-UI";
  }
  return "?";
}

std::string_view to_string(Side s) noexcept {
  return s == Side::Model ? "model" : "auditor";
}

Variant parse_variant(std::string_view name) {
  for (Variant v : {Variant::LR, Variant::LR_UI, Variant::SR_LR, Variant::SR_LR_UI}) {
    if (name == to_string(v)) return v;
  }
  throw ConfigError("unknown e-process variant '" + std::string(name) + "'");
}

double clamp_forecast(Side side, double gamma, double q) noexcept {
  if (side == Side::Model) return std::clamp(gamma, kForecastMin, q - kForecastMargin);
  return std::clamp(gamma, q + kForecastMargin, kForecastMax);
}

EProcessState EProcessState::initial(Variant variant, Side side) noexcept {
  EProcessState s;
  s.variant = variant;
  s.side = side;
  s.active = side == Side::Model;
  return s;
}

double EProcessState::wealth() const { return std::exp(log_wealth); }

double bernoulli_log_pmf(Score y, double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw DomainError("Bernoulli parameter must lie in (0,1)");
  }
  return y.correct() ? std::log(gamma) : std::log1p(-gamma);
}

double step_log_ratio(Score y, double alt, double q) {
  return bernoulli_log_pmf(y, alt) - bernoulli_log_pmf(y, q);
}

double sr_log_weight(std::int64_t j, double rho) {
  return std::log1p(-rho) + static_cast<double>(j - 1) * std::log(rho);
}

namespace {

void require_kind(const EProcessState& s, bool variant_ok, Side side, const char* op) {
  if (!variant_ok || s.side != side) {
    throw PreconditionError(std::string(op) + ": e-process kind mismatch (" +
                            std::string(to_string(s.variant)) + ", " +
                            std::string(to_string(s.side)) + ")");
  }
}

double log_add_exp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

EProcessState apply_sr(EProcessState s, double log_factor, double rho) {
  s.log_sr_accumulator =
      log_factor + log_add_exp(s.log_sr_accumulator, sr_log_weight(s.next_weight_index, rho));
  s.log_wealth = s.log_sr_accumulator;
  ++s.next_weight_index;
  ++s.step_count;
  return s;
}

// Auditor processes contribute nothing before t = m; returns true when the
// step at index step_count + 1 is gated.
bool gated(EProcessState& s, const AuditConfig& cfg) {
  if (s.step_count + 1 < cfg.m) {
    ++s.step_count;
    return true;
  }
  s.active = true;
  return false;
}

}  // namespace

EProcessState lr_model_update(EProcessState state, Score y, const AuditConfig& cfg) {
  require_kind(state, state.variant == Variant::LR, Side::Model, "lr_model_update");
  state.log_wealth += step_log_ratio(y, cfg.q - cfg.delta, cfg.q);
  ++state.step_count;
  return state;
}

EProcessState lr_ui_model_update(EProcessState state, Score y, double gamma_hat,
                                 const AuditConfig& cfg) {
  require_kind(state, state.variant == Variant::LR_UI, Side::Model, "lr_ui_model_update");
  if (!(gamma_hat > 0.0 && gamma_hat < cfg.q)) {
    throw PreconditionError("model-side forecast must lie in (0, q)");
  }
  state.log_wealth += step_log_ratio(y, gamma_hat, cfg.q);
  ++state.step_count;
  return state;
}

EProcessState sr_update(EProcessState state, double log_factor, const AuditConfig& cfg) {
  require_kind(state, is_sr(state.variant), Side::Model, "sr_update");
  return apply_sr(state, log_factor, cfg.sr_rho);
}

EProcessState lr_auditor_update(EProcessState state, Score y, const AuditConfig& cfg) {
  require_kind(state, state.variant == Variant::LR, Side::Auditor, "lr_auditor_update");
  if (gated(state, cfg)) return state;
  state.log_wealth += step_log_ratio(y, cfg.q + cfg.delta_prime, cfg.q);
  ++state.step_count;
  return state;
}

EProcessState lr_ui_auditor_update(EProcessState state, Score y, double gamma_hat,
                                   const AuditConfig& cfg) {
  require_kind(state, state.variant == Variant::LR_UI, Side::Auditor, "lr_ui_auditor_update");
  if (gated(state, cfg)) return state;
  if (!(gamma_hat >= cfg.q && gamma_hat < 1.0)) {
    throw PreconditionError("auditor-side forecast must lie in [q, 1)");
  }
  state.log_wealth += step_log_ratio(y, gamma_hat, cfg.q);
  ++state.step_count;
  return state;
}

EProcessState sr_auditor_update(EProcessState state, double log_factor,
                                const AuditConfig& cfg) {
  require_kind(state, is_sr(state.variant), Side::Auditor, "sr_auditor_update");
  if (gated(state, cfg)) return state;
  return apply_sr(state, log_factor, cfg.sr_rho);
}

EProcessState advance(EProcessState state, Score y, std::optional<double> gamma_hat,
                      const AuditConfig& cfg) {
  if (uses_forecast(state.variant) && !gamma_hat) {
    throw PreconditionError("UI variants need a forecast for every step");
  }
  if (state.side == Side::Model) {
    switch (state.variant) {
      case Variant::LR: return lr_model_update(state, y, cfg);
      case Variant::LR_UI: return lr_ui_model_update(state, y, *gamma_hat, cfg);
      case Variant::SR_LR:
        return sr_update(state, step_log_ratio(y, cfg.q - cfg.delta, cfg.q), cfg);
      case Variant::SR_LR_UI:
        if (!(*gamma_hat > 0.0 && *gamma_hat < cfg.q)) {
          throw PreconditionError("model-side forecast must lie in (0, q)");
        }
        return sr_update(state, step_log_ratio(y, *gamma_hat, cfg.q), cfg);
    }
  }
  switch (state.variant) {
    case Variant::LR: return lr_auditor_update(state, y, cfg);
    case Variant::LR_UI: return lr_ui_auditor_update(state, y, *gamma_hat, cfg);
    case Variant::SR_LR: {
      const bool active = state.step_count + 1 >= cfg.m;
      const double lf = active ? step_log_ratio(y, cfg.q + cfg.delta_prime, cfg.q) : 0.0;
      return sr_auditor_update(state, lf, cfg);
    }
    case Variant::SR_LR_UI: {
      const bool active = state.step_count + 1 >= cfg.m;
      if (active && !(*gamma_hat >= cfg.q && *gamma_hat < 1.0)) {
        throw PreconditionError("auditor-side forecast must lie in [q, 1)");
      }
      const double lf = active ? step_log_ratio(y, *gamma_hat, cfg.q) : 0.0;
      return sr_auditor_update(state, lf, cfg);
    }
  }
  return state;
}

}  // namespace savi
