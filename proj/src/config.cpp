#include "savi/config.hpp"

#include <cmath>

namespace savi {

Score Score::from_int(std::int64_t v) {
  if (v != 0 && v != 1) {
    throw DomainError("score must be 0 or 1, got " + std::to_string(v));
  }
  return Score(v == 1);
}

namespace {

bool open_unit(double x) { return x > 0.0 && x < 1.0; }

}  // namespace

void AuditConfig::validate() const {
  if (!open_unit(q)) throw ConfigError("q must lie in (0,1)");
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw ConfigError("epsilon must lie in (0,1]");
  if (!open_unit(alpha)) throw ConfigError("alpha must lie in (0,1)");
  if (m < 1) throw ConfigError("m must be a positive integer");
  if (max_budget < 1) throw ConfigError("max_budget must be a positive integer");
  if (m > max_budget) throw ConfigError("m must not exceed max_budget");
  if (!(delta > 0.0 && delta < q)) throw ConfigError("delta must lie in (0, q)");
  if (!(delta_prime > 0.0 && delta_prime < 1.0 - q)) {
    throw ConfigError("delta_prime must lie in (0, 1 - q)");
  }
  // The range checks above already imply these, but rounding can still put
  // q - delta at 0 or q + delta_prime at 1.
  if (!(q - delta > 0.0)) throw ConfigError("q - delta must be positive");
  if (!(q + delta_prime < 1.0)) throw ConfigError("q + delta_prime must be below 1");
  if (!open_unit(sr_rho)) throw ConfigError("sr_rho must lie in (0,1)");
}

double AuditConfig::log_threshold() const { return -std::log(alpha); }

}  // namespace savi
