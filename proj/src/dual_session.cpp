#include "savi/dual_session.hpp"

#include <chrono>

namespace savi {

std::string_view to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::Continue: return "Continue";
    case Verdict::RejectModelNull: return "RejectModelNull";
    case Verdict::RejectAuditorNull: return "RejectAuditorNull";
    case Verdict::BudgetExhausted: return "BudgetExhausted";
  }
  return "?";
}

Verdict parse_verdict(std::string_view name) {
  for (Verdict v : {Verdict::Continue, Verdict::RejectModelNull, Verdict::RejectAuditorNull,
                    Verdict::BudgetExhausted}) {
    if (name == to_string(v)) return v;
  }
  throw DomainError("unknown verdict '" + std::string(name) + "'");
}

DualSession::DualSession(AuditConfig cfg, TestDesign design, bool record_timestamps)
    : cfg_(cfg),
      design_(std::move(design)),
      model_(EProcessState::initial(design_.model, Side::Model)),
      auditor_(EProcessState::initial(design_.auditor, Side::Auditor)),
      record_timestamps_(record_timestamps) {
  cfg_.validate();
  if (uses_forecast(design_.model)) {
    model_forecaster_ = ForecastGrid::from_settings(Side::Model, design_.forecast, cfg_.q);
  }
  if (uses_forecast(design_.auditor)) {
    auditor_forecaster_ = ForecastGrid::from_settings(Side::Auditor, design_.forecast, cfg_.q);
  }
}

std::optional<double> DualSession::pending_forecast_model() const {
  if (!model_forecaster_) return std::nullopt;
  return model_forecaster_->predict_clamped();
}

std::optional<double> DualSession::pending_forecast_auditor() const {
  if (!auditor_forecaster_) return std::nullopt;
  return auditor_forecaster_->predict_clamped();
}

const AuditEvent& DualSession::step(std::string subgroup_id, Score score) {
  if (terminal()) {
    throw StateError("session already reached verdict " + std::string(to_string(verdict_)));
  }

  // Bets are fixed before the score is looked at.
  const std::optional<double> gamma_model = pending_forecast_model();
  const std::optional<double> gamma_auditor = pending_forecast_auditor();

  model_ = advance(model_, score, gamma_model, cfg_);
  auditor_ = advance(auditor_, score, gamma_auditor, cfg_);

  if (model_forecaster_) model_forecaster_->update(score);
  if (auditor_forecaster_) auditor_forecaster_->update(score);

  AuditEvent ev;
  ev.t = steps() + 1;
  ev.subgroup_id = std::move(subgroup_id);
  ev.score = score;
  ev.model_wealth = model_.wealth();
  ev.auditor_wealth = auditor_.wealth();
  ev.forecast_model = gamma_model;
  ev.forecast_auditor = gamma_auditor;
  if (record_timestamps_) {
    ev.timestamp = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::system_clock::now().time_since_epoch())
                       .count();
  }
  history_.push_back(std::move(ev));

  verdict_ = resolve_verdict(model_.log_wealth, auditor_.log_wealth, auditor_.active, steps(), cfg_);
  return history_.back();
}

Verdict resolve_verdict(double model_log_wealth, double auditor_log_wealth, bool auditor_active,
                        std::int64_t steps, const AuditConfig& cfg) {
  const double log_threshold = cfg.log_threshold();
  if (model_log_wealth >= log_threshold) return Verdict::RejectModelNull;
  if (auditor_active && auditor_log_wealth >= log_threshold) return Verdict::RejectAuditorNull;
  if (steps >= cfg.max_budget) return Verdict::BudgetExhausted;
  return Verdict::Continue;
}

std::vector<WealthPoint> wealth_trace(const DualSession& session) {
  std::vector<WealthPoint> out;
  out.reserve(session.history().size());
  for (const AuditEvent& ev : session.history()) {
    out.push_back({ev.t, ev.model_wealth, ev.auditor_wealth});
  }
  return out;
}

DualSession replay(const AuditConfig& cfg, const TestDesign& design,
                   std::span<const AuditEvent> events) {
  DualSession session(cfg, design, false);
  for (const AuditEvent& ev : events) session.step(ev.subgroup_id, ev.score);
  return session;
}

std::optional<std::size_t> first_replay_mismatch(const AuditConfig& cfg, const TestDesign& design,
                                                 std::span<const AuditEvent> events) {
  DualSession session(cfg, design, false);
  for (std::size_t i = 0; i < events.size(); ++i) {
    const AuditEvent& logged = events[i];
    if (session.terminal() || logged.t != static_cast<std::int64_t>(i) + 1) return i;
    const AuditEvent& live = session.step(logged.subgroup_id, logged.score);
    if (live.model_wealth != logged.model_wealth || live.auditor_wealth != logged.auditor_wealth ||
        live.forecast_model != logged.forecast_model ||
        live.forecast_auditor != logged.forecast_auditor) {
      return i;
    }
  }
  return std::nullopt;
}

}  // namespace savi
