#ifndef SAVI_JSON_IO_HPP
#define SAVI_JSON_IO_HPP

#include <iosfwd>
#include <vector>

#include "json.hpp"

#include "savi/config.hpp"
#include "savi/dual_session.hpp"
#include "savi/forecaster.hpp"

namespace savi {

using json = nlohmann::json;

// Missing keys keep their defaults. Type errors and invalid values are
// reported as ConfigError.
json config_to_json(const AuditConfig& cfg);
AuditConfig config_from_json(const json& j);

json forecast_settings_to_json(const ForecastSettings& fs);
ForecastSettings forecast_settings_from_json(const json& j);

/// {"model": "SR-LR-UI", "auditor": "LR-UI", "forecast": {...}}. A missing
/// "auditor" repeats the model-side variant.
json design_to_json(const TestDesign& design);
TestDesign design_from_json(const json& j);

json event_to_json(const AuditEvent& ev);
/// Throws DomainError on malformed records (missing fields, score not 0/1).
AuditEvent event_from_json(const json& j);

/// Writes one compact JSON object terminated by '\n'.
void write_event_line(std::ostream& out, const AuditEvent& ev);
/// Reads a JSON-lines stream, skipping blank lines.
std::vector<AuditEvent> read_events(std::istream& in);

}  // namespace savi

#endif  // SAVI_JSON_IO_HPP
