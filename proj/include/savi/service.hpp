#ifndef SAVI_SERVICE_HPP
#define SAVI_SERVICE_HPP

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "savi/auditors.hpp"
#include "savi/dual_session.hpp"
#include "savi/simulation.hpp"

namespace httplib {
class Server;
}

namespace savi {

class NotFoundError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConflictError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CatalogEntry {
  std::string id;
  std::string label;
  double mass = 0.0;  // 0 for every entry means uniform masses
};

/**
 * Live audit sessions driven by a human auditor.
 *
 * Every session is persisted as `<id>.session.json` (configuration and
 * catalog) plus `<id>.jsonl` (one AuditEvent per line, appended and flushed
 * per observation). Constructing the service over an existing directory
 * replays every log, so a restarted process resumes with identical wealths.
 *
 * Writes to one session are serialised; reads and event streams may run
 * concurrently.
 */
class AuditService {
 public:
  explicit AuditService(std::filesystem::path data_dir);
  ~AuditService();

  AuditService(const AuditService&) = delete;
  AuditService& operator=(const AuditService&) = delete;

  /// Throws ConfigError for an invalid configuration or catalog.
  std::string create_session(const AuditConfig& cfg, const TestDesign& design,
                             std::vector<CatalogEntry> catalog);

  /// Returns the updated state summary together with the new event.
  /// Throws NotFoundError, ConflictError (terminal session) or DomainError
  /// (unknown subgroup, score not 0/1).
  nlohmann::json submit_observation(const std::string& session_id, const std::string& subgroup_id,
                                    std::int64_t score);

  nlohmann::json get_state(const std::string& session_id) const;
  nlohmann::json list_sessions() const;

  struct EventBatch {
    std::vector<AuditEvent> events;
    bool terminal = false;
    std::size_t total = 0;
  };

  /// Events with index >= from. Blocks up to `wait` when none are pending
  /// and the session is still live.
  EventBatch events_from(const std::string& session_id, std::size_t from,
                         std::chrono::milliseconds wait = std::chrono::milliseconds(0)) const;

  /// Final log-domain wealths, used by the replay checks.
  std::pair<double, double> log_wealths(const std::string& session_id) const;

  const std::filesystem::path& data_dir() const noexcept { return data_dir_; }
  std::filesystem::path log_path(const std::string& session_id) const;

 private:
  struct Session;

  std::shared_ptr<Session> find(const std::string& session_id) const;
  void load_existing();
  nlohmann::json summary(const Session& s) const;

  std::filesystem::path data_dir_;
  mutable std::shared_mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
};

/// Registers the HTTP routes on `server`. The service must outlive it.
void mount_routes(httplib::Server& server, AuditService& service);

/// Blocking: serves on host:port until the process is stopped.
int serve(AuditService& service, const std::string& host, int port);

}  // namespace savi

#endif  // SAVI_SERVICE_HPP
