#ifndef SAVI_HARNESS_HPP
#define SAVI_HARNESS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "savi/auditors.hpp"
#include "savi/config.hpp"
#include "savi/dual_session.hpp"
#include "savi/simulation.hpp"

namespace savi {

/// A named truth table to run the experiment grid on.
struct LevelSpec {
  std::string name;
  SubgroupSpace space;
};

struct ExperimentSpec {
  AuditConfig cfg;
  ScenarioMode mode = ScenarioMode::Generator;
  std::vector<PoolItem> pool;
  std::vector<LevelSpec> levels;
  std::vector<StrategyParams> strategies;
  std::vector<TestDesign> variants;
  std::int64_t replicates = 100;
  std::uint64_t master_seed = 0;
  int parallelism = 1;
  bool keep_traces = true;

  /// Throws ConfigError. Called by run_experiment before any replicate runs.
  void validate() const;
};

/// Parses the JSON experiment file. Throws ConfigError on any problem.
ExperimentSpec experiment_spec_from_json(const nlohmann::json& j);

struct ReplicateOutcome {
  Verdict verdict = Verdict::Continue;
  std::int64_t stop_time = 0;     // observations consumed; budget exhaustion counts as max_budget
  std::int64_t observations = 0;  // raw count, differs from stop_time only if the pool ran dry
  bool stopped_at_first_crossing = true;
  std::vector<std::size_t> bets;
  std::vector<double> model_wealth;
  std::vector<double> auditor_wealth;
  std::vector<double> model_log_wealth;
  std::vector<double> auditor_log_wealth;
};

/// One simulated audit. The environment and the strategy draw from
/// independent streams derived from `seed`.
ReplicateOutcome run_replicate(const AuditConfig& cfg, const TestDesign& design,
                               const SubgroupSpace& space, ScenarioMode mode,
                               const std::vector<PoolItem>& pool, const StrategyParams& strategy,
                               std::uint64_t seed, bool keep_traces = true);

struct StopStats {
  double min = 0;
  double q25 = 0;
  double median = 0;
  double q75 = 0;
  double max = 0;
};

/// Linear-interpolation quantiles of the values; nullopt when empty.
std::optional<StopStats> stop_stats(std::vector<double> values);

struct ReportRow {
  std::string variant;
  std::string strategy;
  std::string level;
  std::int64_t replicates = 0;
  std::int64_t reject_model = 0;
  std::int64_t reject_auditor = 0;
  std::int64_t inconclusive = 0;
  std::int64_t first_crossing_violations = 0;
  std::optional<double> reject_model_rate;
  std::optional<double> reject_auditor_rate;
  std::optional<double> inconclusive_rate;
  std::optional<StopStats> stop;
  /// Restricted to runs that reached the correct conclusion or the budget.
  std::optional<StopStats> conditioned_stop;
  std::vector<double> mean_model_wealth;
  std::vector<double> mean_auditor_wealth;
};

struct ExperimentReport {
  std::vector<ReportRow> rows;
};

/// Deterministic given master_seed; replicate r uses split_seed(master_seed, r)
/// regardless of parallelism.
ExperimentReport run_experiment(const ExperimentSpec& spec);

/// Folds outcomes (ordered by replicate index) into one report row.
ReportRow summarize(std::string variant, std::string strategy, std::string level,
                    bool model_null_true, std::int64_t max_budget,
                    const std::vector<ReplicateOutcome>& outcomes);

std::string variant_label(const TestDesign& design);

enum class ReportFormat { Json, Csv };
ReportFormat parse_report_format(std::string_view name);

inline constexpr std::string_view kCsvHeader =
    "variant,strategy,level,reject_model_rate,reject_auditor_rate,inconclusive_rate,"
    "stop_min,stop_q25,stop_median,stop_q75,stop_max";

nlohmann::json report_to_json(const ExperimentReport& report);
ExperimentReport report_from_json(const nlohmann::json& j);
std::string emit_report(const ExperimentReport& report, ReportFormat format);

/// Parses the summary columns of a CSV produced by emit_report. Traces and
/// counts are not part of the CSV and come back empty.
ExperimentReport parse_report_csv(std::string_view csv);

}  // namespace savi

#endif  // SAVI_HARNESS_HPP
