#include "savi/json_io.hpp"

#include <istream>
#include <ostream>
#include <string>

namespace savi {

namespace {

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
  if (!j.contains(key) || j.at(key).is_null()) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("field '") + key + "': " + e.what());
  }
}

}  // namespace

json config_to_json(const AuditConfig& cfg) {
  return json{{"q", cfg.q},
              {"epsilon", cfg.epsilon},
              {"alpha", cfg.alpha},
              {"m", cfg.m},
              {"delta", cfg.delta},
              {"delta_prime", cfg.delta_prime},
              {"max_budget", cfg.max_budget},
              {"sr_rho", cfg.sr_rho}};
}

AuditConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("audit config must be a JSON object");
  AuditConfig cfg;
  read_opt(j, "q", cfg.q);
  read_opt(j, "epsilon", cfg.epsilon);
  read_opt(j, "alpha", cfg.alpha);
  read_opt(j, "m", cfg.m);
  read_opt(j, "delta", cfg.delta);
  read_opt(j, "delta_prime", cfg.delta_prime);
  read_opt(j, "max_budget", cfg.max_budget);
  read_opt(j, "sr_rho", cfg.sr_rho);
  cfg.validate();
  return cfg;
}

json forecast_settings_to_json(const ForecastSettings& fs) {
  return json{{"learning_rate", fs.learning_rate},
              {"model_grid", fs.model_grid},
              {"auditor_grid", fs.auditor_grid}};
}

ForecastSettings forecast_settings_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("forecast settings must be a JSON object");
  ForecastSettings fs;
  read_opt(j, "learning_rate", fs.learning_rate);
  read_opt(j, "model_grid", fs.model_grid);
  read_opt(j, "auditor_grid", fs.auditor_grid);
  return fs;
}

json design_to_json(const TestDesign& design) {
  return json{{"model", std::string(to_string(design.model))},
              {"auditor", std::string(to_string(design.auditor))},
              {"forecast", forecast_settings_to_json(design.forecast)}};
}

TestDesign design_from_json(const json& j) {
  TestDesign d;
  if (j.is_string()) {
    d.model = d.auditor = parse_variant(j.get<std::string>());
    return d;
  }
  if (!j.is_object()) throw ConfigError("test design must be a variant name or an object");
  std::string model = "LR";
  read_opt(j, "model", model);
  d.model = parse_variant(model);
  std::string auditor(to_string(d.model));
  read_opt(j, "auditor", auditor);
  d.auditor = parse_variant(auditor);
  if (j.contains("forecast")) d.forecast = forecast_settings_from_json(j.at("forecast"));
  return d;
}

json event_to_json(const AuditEvent& ev) {
  json j{{"t", ev.t},
         {"subgroup_id", ev.subgroup_id},
         {"score", ev.score.value()},
         {"model_wealth", ev.model_wealth},
         {"auditor_wealth", ev.auditor_wealth},
         {"forecast_model", nullptr},
         {"forecast_auditor", nullptr},
         {"timestamp", ev.timestamp}};
  if (ev.forecast_model) j["forecast_model"] = *ev.forecast_model;
  if (ev.forecast_auditor) j["forecast_auditor"] = *ev.forecast_auditor;
  return j;
}

AuditEvent event_from_json(const json& j) {
  try {
    AuditEvent ev;
    ev.t = j.at("t").get<std::int64_t>();
    ev.subgroup_id = j.at("subgroup_id").get<std::string>();
    ev.score = Score::from_int(j.at("score").get<std::int64_t>());
    ev.model_wealth = j.at("model_wealth").get<double>();
    ev.auditor_wealth = j.at("auditor_wealth").get<double>();
    if (j.contains("forecast_model") && !j["forecast_model"].is_null()) {
      ev.forecast_model = j["forecast_model"].get<double>();
    }
    if (j.contains("forecast_auditor") && !j["forecast_auditor"].is_null()) {
      ev.forecast_auditor = j["forecast_auditor"].get<double>();
    }
    if (j.contains("timestamp") && j["timestamp"].is_number_integer()) {
      ev.timestamp = j["timestamp"].get<std::int64_t>();
    }
    return ev;
  } catch (const json::exception& e) {
    throw DomainError(std::string("malformed audit event: ") + e.what());
  }
}

void write_event_line(std::ostream& out, const AuditEvent& ev) {
  out << event_to_json(ev).dump() << '\n';
}

std::vector<AuditEvent> read_events(std::istream& in) {
  std::vector<AuditEvent> events;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DomainError(std::string("malformed JSON line: ") + e.what());
    }
    events.push_back(event_from_json(j));
  }
  return events;
}

}  // namespace savi
