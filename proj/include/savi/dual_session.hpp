#ifndef SAVI_DUAL_SESSION_HPP
#define SAVI_DUAL_SESSION_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "savi/config.hpp"
#include "savi/eprocess.hpp"
#include "savi/forecaster.hpp"

namespace savi {

enum class Verdict { Continue, RejectModelNull, RejectAuditorNull, BudgetExhausted };

std::string_view to_string(Verdict v) noexcept;
Verdict parse_verdict(std::string_view name);

/// Which e-process runs on each side, and the forecaster settings used by
/// the UI variants.
struct TestDesign {
  Variant model = Variant::LR;
  Variant auditor = Variant::LR;
  ForecastSettings forecast;

  /// Same variant on both sides.
  static TestDesign symmetric(Variant v) { return TestDesign{v, v, {}}; }
};

/// One append-only record of the dual-testing loop. Wealth fields are the
/// post-update e-process values at step t.
struct AuditEvent {
  std::int64_t t = 0;
  std::string subgroup_id;
  Score score{false};
  double model_wealth = 1.0;
  double auditor_wealth = 1.0;
  std::optional<double> forecast_model;
  std::optional<double> forecast_auditor;
  std::int64_t timestamp = 0;  // unix milliseconds, informational only
};

struct WealthPoint {
  std::int64_t t;
  double model_wealth;
  double auditor_wealth;
};

/**
 * Dual testing state machine: one model-null and one auditor-null
 * e-process driven by a shared stream of (subgroup, score) observations.
 *
 * Each step uses forecasts fixed by the previous filtration, updates both
 * processes (the auditor side stays at 1 until t = m), lets the forecasters
 * learn from the new score and then checks the verdict. The model-null
 * check runs first, so a simultaneous crossing resolves to RejectModelNull.
 */
class DualSession {
 public:
  explicit DualSession(AuditConfig cfg, TestDesign design = {}, bool record_timestamps = true);

  /// Throws StateError once the verdict is terminal.
  const AuditEvent& step(std::string subgroup_id, Score score);

  Verdict verdict() const noexcept { return verdict_; }
  bool terminal() const noexcept { return verdict_ != Verdict::Continue; }
  std::int64_t steps() const noexcept { return static_cast<std::int64_t>(history_.size()); }

  const AuditConfig& config() const noexcept { return cfg_; }
  const TestDesign& design() const noexcept { return design_; }
  const EProcessState& model_process() const noexcept { return model_; }
  const EProcessState& auditor_process() const noexcept { return auditor_; }
  const std::vector<AuditEvent>& history() const noexcept { return history_; }

  /// Forecasts that the next step will bet with, if the variant uses one.
  std::optional<double> pending_forecast_model() const;
  std::optional<double> pending_forecast_auditor() const;

 private:
  AuditConfig cfg_;
  TestDesign design_;
  EProcessState model_;
  EProcessState auditor_;
  std::optional<ForecastGrid> model_forecaster_;
  std::optional<ForecastGrid> auditor_forecaster_;
  std::vector<AuditEvent> history_;
  Verdict verdict_ = Verdict::Continue;
  bool record_timestamps_;
};

/// Verdict after a step given the post-update log wealths. The model-null
/// check wins a simultaneous crossing.
Verdict resolve_verdict(double model_log_wealth, double auditor_log_wealth, bool auditor_active,
                        std::int64_t steps, const AuditConfig& cfg);

std::vector<WealthPoint> wealth_trace(const DualSession& session);

/// Re-runs a logged observation stream through a fresh session.
DualSession replay(const AuditConfig& cfg, const TestDesign& design,
                   std::span<const AuditEvent> events);

/// Index of the first event whose logged wealths or forecasts differ from
/// a replay, or nullopt if the log is fully reproduced.
std::optional<std::size_t> first_replay_mismatch(const AuditConfig& cfg, const TestDesign& design,
                                                 std::span<const AuditEvent> events);

}  // namespace savi

#endif  // SAVI_DUAL_SESSION_HPP
