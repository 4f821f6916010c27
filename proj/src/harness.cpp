#include "savi/harness.hpp"

#include "savi/json_io.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

namespace savi {

using nlohmann::json;

void ExperimentSpec::validate() const {
  cfg.validate();
  if (replicates < 0) throw ConfigError("replicates must be nonnegative");
  if (parallelism < 1) throw ConfigError("parallelism must be at least 1");
  if (levels.empty()) throw ConfigError("experiment needs at least one level");
  if (strategies.empty()) throw ConfigError("experiment needs at least one strategy");
  if (variants.empty()) throw ConfigError("experiment needs at least one e-process variant");
  for (const StrategyParams& s : strategies) s.validate();
  for (const TestDesign& d : variants) {
    // Builds the forecasters, which validates grids against q.
    DualSession probe(cfg, d, false);
  }
  for (const LevelSpec& level : levels) {
    if (mode == ScenarioMode::FinitePool) {
      AuditEnvironment probe(level.space, mode, pool, 0);
      if (probe.exhausted()) throw ConfigError("finite pool is empty for level " + level.name);
    }
  }
}

namespace {

template <typename T>
T field(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("field '") + key + "': " + e.what());
  }
}

StrategyParams strategy_from_json(const json& j) {
  if (j.is_string()) {
    StrategyParams p;
    p.kind = parse_strategy_kind(j.get<std::string>());
    return p;
  }
  if (!j.is_object()) throw ConfigError("strategy must be a name or an object");
  StrategyParams p;
  p.kind = parse_strategy_kind(field<std::string>(j, "kind", "Adaptive"));
  p.n_init = field(j, "n_init", p.n_init);
  p.ucb_c = field(j, "ucb_c", p.ucb_c);
  p.exploration_quantile = field(j, "exploration_quantile", p.exploration_quantile);
  p.explore_rate = field(j, "explore_rate", p.explore_rate);
  p.pretrain_budget = field(j, "pretrain_budget", p.pretrain_budget);
  p.prior_alpha = field(j, "prior_alpha", p.prior_alpha);
  p.prior_beta = field(j, "prior_beta", p.prior_beta);
  return p;
}

}  // namespace

ExperimentSpec experiment_spec_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("experiment spec must be a JSON object");
  ExperimentSpec spec;
  if (j.contains("cfg")) spec.cfg = config_from_json(j.at("cfg"));
  spec.replicates = field<std::int64_t>(j, "replicates", spec.replicates);
  spec.master_seed = field<std::uint64_t>(j, "master_seed", spec.master_seed);
  spec.parallelism = field<int>(j, "parallelism", spec.parallelism);
  spec.keep_traces = field<bool>(j, "keep_traces", spec.keep_traces);

  const json scenario = j.contains("scenario") ? j.at("scenario") : json::object();
  if (!scenario.is_object()) throw ConfigError("scenario must be an object");
  spec.mode = parse_scenario_mode(field<std::string>(scenario, "mode", "generator"));
  if (scenario.contains("pool")) {
    try {
      for (const auto& item : scenario.at("pool")) {
        spec.pool.push_back({item.at("item_id").get<std::string>(), item.at("cell_id").get<std::string>()});
      }
    } catch (const json::exception& e) {
      throw ConfigError(std::string("malformed pool: ") + e.what());
    }
  }
  if (scenario.contains("truth_table")) {
    const json& table = scenario.at("truth_table");
    spec.levels.push_back({field<std::string>(table, "name", "custom"), space_from_json(table)});
  }
  if (scenario.contains("degradation")) {
    const json& deg = scenario.at("degradation");
    for (const json& d : deg.is_array() ? deg : json::array({deg})) {
      if (!d.is_string()) throw ConfigError("degradation must be a level name");
      const Degradation level = parse_degradation(d.get<std::string>());
      spec.levels.push_back({std::string(to_string(level)),
                             load_degradation_table(level, spec.cfg.epsilon)});
    }
  }
  if (spec.levels.empty()) {
    spec.levels.push_back({"Large", load_degradation_table(Degradation::Large, spec.cfg.epsilon)});
  }

  const json strategies = j.contains("strategy") ? j.at("strategy") : json("Adaptive");
  for (const json& s : strategies.is_array() ? strategies : json::array({strategies})) {
    spec.strategies.push_back(strategy_from_json(s));
  }

  const ForecastSettings shared =
      j.contains("forecast") ? forecast_settings_from_json(j.at("forecast")) : ForecastSettings{};
  const json variants = j.contains("variants") ? j.at("variants") : json::array({"LR"});
  for (const json& v : variants.is_array() ? variants : json::array({variants})) {
    TestDesign d = design_from_json(v);
    if (!(v.is_object() && v.contains("forecast"))) d.forecast = shared;
    spec.variants.push_back(std::move(d));
  }
  return spec;
}

ReplicateOutcome run_replicate(const AuditConfig& cfg, const TestDesign& design,
                               const SubgroupSpace& space, ScenarioMode mode,
                               const std::vector<PoolItem>& pool, const StrategyParams& strategy,
                               std::uint64_t seed, bool keep_traces) {
  DualSession session(cfg, design, false);
  AuditEnvironment env(space, mode, pool, split_seed(seed, 0));
  Rng strategy_rng(split_seed(seed, 1));
  StrategyState state(strategy, space.size());

  ReplicateOutcome out;
  const double log_threshold = cfg.log_threshold();
  while (!session.terminal() && !env.exhausted()) {
    const std::size_t cell = next_bet(state, space, cfg, strategy_rng, &env.availability());
    const AuditEnvironment::Draw draw = env.sample(cell);
    record_observation(state, cell, draw.score);
    const AuditEvent& ev = session.step(space.cell(cell).id, draw.score);
    out.bets.push_back(cell);

    const EProcessState& model = session.model_process();
    const EProcessState& auditor = session.auditor_process();
    const bool crossed = model.log_wealth >= log_threshold ||
                         (auditor.active && auditor.log_wealth >= log_threshold);
    if (crossed && !session.terminal()) out.stopped_at_first_crossing = false;
    if (keep_traces) {
      out.model_wealth.push_back(ev.model_wealth);
      out.auditor_wealth.push_back(ev.auditor_wealth);
      out.model_log_wealth.push_back(model.log_wealth);
      out.auditor_log_wealth.push_back(auditor.log_wealth);
    }
  }
  out.verdict = session.verdict();
  out.observations = session.steps();
  out.stop_time = out.verdict == Verdict::BudgetExhausted ? cfg.max_budget : session.steps();
  return out;
}

std::optional<StopStats> stop_stats(std::vector<double> values) {
  if (values.empty()) return std::nullopt;
  std::sort(values.begin(), values.end());
  const auto quantile = [&](double p) {
    const double h = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  return StopStats{values.front(), quantile(0.25), quantile(0.5), quantile(0.75), values.back()};
}

std::string variant_label(const TestDesign& design) {
  std::string label(to_string(design.model));
  if (design.auditor != design.model) label += "/aud:" + std::string(to_string(design.auditor));
  return label;
}

ReportRow summarize(std::string variant, std::string strategy, std::string level,
                    bool model_null_true, std::int64_t max_budget,
                    const std::vector<ReplicateOutcome>& outcomes) {
  ReportRow row;
  row.variant = std::move(variant);
  row.strategy = std::move(strategy);
  row.level = std::move(level);
  row.replicates = static_cast<std::int64_t>(outcomes.size());

  const Verdict correct = model_null_true ? Verdict::RejectAuditorNull : Verdict::RejectModelNull;
  std::vector<double> stops;
  std::vector<double> conditioned;
  const auto horizon = static_cast<std::size_t>(max_budget);
  std::vector<double> model_sum(horizon, 0.0);
  std::vector<double> auditor_sum(horizon, 0.0);
  std::int64_t traced = 0;

  for (const ReplicateOutcome& o : outcomes) {
    switch (o.verdict) {
      case Verdict::RejectModelNull: ++row.reject_model; break;
      case Verdict::RejectAuditorNull: ++row.reject_auditor; break;
      default: ++row.inconclusive; break;
    }
    if (!o.stopped_at_first_crossing) ++row.first_crossing_violations;
    stops.push_back(static_cast<double>(o.stop_time));
    if (o.verdict == correct || o.verdict == Verdict::BudgetExhausted) {
      conditioned.push_back(static_cast<double>(o.stop_time));
    }
    if (!o.model_wealth.empty()) {
      ++traced;
      for (std::size_t t = 0; t < horizon; ++t) {
        const std::size_t k = std::min(t, o.model_wealth.size() - 1);
        model_sum[t] += o.model_wealth[k];
        auditor_sum[t] += o.auditor_wealth[k];
      }
    }
  }
  if (row.replicates > 0) {
    const auto n = static_cast<double>(row.replicates);
    row.reject_model_rate = static_cast<double>(row.reject_model) / n;
    row.reject_auditor_rate = static_cast<double>(row.reject_auditor) / n;
    row.inconclusive_rate = static_cast<double>(row.inconclusive) / n;
  }
  row.stop = stop_stats(std::move(stops));
  row.conditioned_stop = stop_stats(std::move(conditioned));
  if (traced > 0) {
    for (std::size_t t = 0; t < horizon; ++t) {
      row.mean_model_wealth.push_back(model_sum[t] / static_cast<double>(traced));
      row.mean_auditor_wealth.push_back(auditor_sum[t] / static_cast<double>(traced));
    }
  }
  return row;
}

namespace {

template <typename F>
void parallel_for(std::int64_t n, int threads, F&& body) {
  if (threads <= 1 || n <= 1) {
    for (std::int64_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> workers;
    const auto count = static_cast<int>(std::min<std::int64_t>(threads, n));
    for (int w = 0; w < count; ++w) {
      workers.emplace_back([&] {
        for (std::int64_t i = next++; i < n; i = next++) {
          try {
            body(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next = n;
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

ExperimentReport run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  ExperimentReport report;
  for (const LevelSpec& level : spec.levels) {
    const bool model_null_true = level.space.mass_below(spec.cfg.q) < level.space.epsilon();
    for (const StrategyParams& strategy : spec.strategies) {
      for (const TestDesign& design : spec.variants) {
        std::vector<ReplicateOutcome> outcomes(static_cast<std::size_t>(spec.replicates));
        parallel_for(spec.replicates, spec.parallelism, [&](std::int64_t r) {
          outcomes[static_cast<std::size_t>(r)] =
              run_replicate(spec.cfg, design, level.space, spec.mode, spec.pool, strategy,
                            split_seed(spec.master_seed, static_cast<std::uint64_t>(r)),
                            spec.keep_traces);
        });
        report.rows.push_back(summarize(variant_label(design), std::string(to_string(strategy.kind)),
                                        level.name, model_null_true, spec.cfg.max_budget,
                                        outcomes));
      }
    }
  }
  return report;
}

ReportFormat parse_report_format(std::string_view name) {
  if (name == "json") return ReportFormat::Json;
  if (name == "csv") return ReportFormat::Csv;
  throw ConfigError("unknown report format '" + std::string(name) + "'");
}

namespace {

json opt_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> number_or_null(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

json stats_json(const std::optional<StopStats>& s) {
  if (!s) return nullptr;
  return {{"min", s->min}, {"q25", s->q25}, {"median", s->median}, {"q75", s->q75}, {"max", s->max}};
}

std::optional<StopStats> stats_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return StopStats{j.at("min").get<double>(), j.at("q25").get<double>(),
                   j.at("median").get<double>(), j.at("q75").get<double>(),
                   j.at("max").get<double>()};
}

std::string csv_number(const std::optional<double>& v) {
  if (!v) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", *v);
  return buf;
}

std::string csv_text(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  return fields;
}

}  // namespace

json report_to_json(const ExperimentReport& report) {
  json rows = json::array();
  for (const ReportRow& r : report.rows) {
    rows.push_back({{"variant", r.variant},
                    {"strategy", r.strategy},
                    {"level", r.level},
                    {"replicates", r.replicates},
                    {"reject_model", r.reject_model},
                    {"reject_auditor", r.reject_auditor},
                    {"inconclusive", r.inconclusive},
                    {"first_crossing_violations", r.first_crossing_violations},
                    {"reject_model_rate", opt_number(r.reject_model_rate)},
                    {"reject_auditor_rate", opt_number(r.reject_auditor_rate)},
                    {"inconclusive_rate", opt_number(r.inconclusive_rate)},
                    {"stop", stats_json(r.stop)},
                    {"conditioned_stop", stats_json(r.conditioned_stop)},
                    {"mean_model_wealth", r.mean_model_wealth},
                    {"mean_auditor_wealth", r.mean_auditor_wealth}});
  }
  return {{"rows", rows}};
}

ExperimentReport report_from_json(const json& j) {
  ExperimentReport report;
  for (const json& jr : j.at("rows")) {
    ReportRow r;
    r.variant = jr.at("variant").get<std::string>();
    r.strategy = jr.at("strategy").get<std::string>();
    r.level = jr.at("level").get<std::string>();
    r.replicates = jr.value("replicates", std::int64_t{0});
    r.reject_model = jr.value("reject_model", std::int64_t{0});
    r.reject_auditor = jr.value("reject_auditor", std::int64_t{0});
    r.inconclusive = jr.value("inconclusive", std::int64_t{0});
    r.first_crossing_violations = jr.value("first_crossing_violations", std::int64_t{0});
    r.reject_model_rate = number_or_null(jr, "reject_model_rate");
    r.reject_auditor_rate = number_or_null(jr, "reject_auditor_rate");
    r.inconclusive_rate = number_or_null(jr, "inconclusive_rate");
    r.stop = stats_from(jr.value("stop", json(nullptr)));
    r.conditioned_stop = stats_from(jr.value("conditioned_stop", json(nullptr)));
    r.mean_model_wealth = jr.value("mean_model_wealth", std::vector<double>{});
    r.mean_auditor_wealth = jr.value("mean_auditor_wealth", std::vector<double>{});
    report.rows.push_back(std::move(r));
  }
  return report;
}

std::string emit_report(const ExperimentReport& report, ReportFormat format) {
  if (format == ReportFormat::Json) return report_to_json(report).dump(2) + "\n";
  std::ostringstream out;
  out << kCsvHeader << '\n';
  for (const ReportRow& r : report.rows) {
    const auto s = [&](double StopStats::*f) -> std::optional<double> {
      if (!r.stop) return std::nullopt;
      return (*r.stop).*f;
    };
    out << csv_text(r.variant) << ',' << csv_text(r.strategy) << ',' << csv_text(r.level) << ','
        << csv_number(r.reject_model_rate) << ',' << csv_number(r.reject_auditor_rate) << ','
        << csv_number(r.inconclusive_rate) << ',' << csv_number(s(&StopStats::min)) << ','
        << csv_number(s(&StopStats::q25)) << ',' << csv_number(s(&StopStats::median)) << ','
        << csv_number(s(&StopStats::q75)) << ',' << csv_number(s(&StopStats::max)) << '\n';
  }
  return out.str();
}

ExperimentReport parse_report_csv(std::string_view csv) {
  ExperimentReport report;
  std::istringstream in{std::string(csv)};
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw DomainError("report CSV header does not match");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> f = split_csv_line(line);
    if (f.size() != 11) throw DomainError("report CSV row must have 11 fields");
    const auto num = [](const std::string& s) -> std::optional<double> {
      if (s.empty()) return std::nullopt;
      return std::stod(s);
    };
    ReportRow r;
    r.variant = f[0];
    r.strategy = f[1];
    r.level = f[2];
    r.reject_model_rate = num(f[3]);
    r.reject_auditor_rate = num(f[4]);
    r.inconclusive_rate = num(f[5]);
    if (!f[6].empty()) {
      r.stop = StopStats{*num(f[6]), *num(f[7]), *num(f[8]), *num(f[9]), *num(f[10])};
    }
    report.rows.push_back(std::move(r));
  }
  return report;
}

}  // namespace savi
