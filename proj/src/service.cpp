#include "savi/service.hpp"

#include <cstdio>
#include <ctime>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "httplib.h"
#include "savi/json_io.hpp"

namespace savi {

using nlohmann::json;

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string new_session_id() {
  static std::mutex mu;
  static std::mt19937_64 gen{std::random_device{}()};
  std::lock_guard lock(mu);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(gen()));
  return buf;
}

std::string utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

SubgroupSpace catalog_space(const std::vector<CatalogEntry>& catalog, double epsilon) {
  if (catalog.empty()) throw ConfigError("subgroup catalog must not be empty");
  double total = 0.0;
  for (const CatalogEntry& e : catalog) {
    if (!(e.mass >= 0.0)) throw ConfigError("catalog masses must be nonnegative");
    total += e.mass;
  }
  std::vector<Cell> cells;
  const auto n = static_cast<double>(catalog.size());
  double assigned = 0.0;
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    Cell c;
    c.id = catalog[i].id;
    c.tag = catalog[i].label;
    c.truth = 0.5;  // unknown; the advisory strategy never reads it
    if (i + 1 == catalog.size()) {
      c.mass = std::max(0.0, 1.0 - assigned);
    } else {
      c.mass = total > 0.0 ? catalog[i].mass / total : 1.0 / n;
    }
    assigned += c.mass;
    cells.push_back(std::move(c));
  }
  return SubgroupSpace(std::move(cells), epsilon);
}

json catalog_json(const std::vector<CatalogEntry>& catalog) {
  json out = json::array();
  for (const CatalogEntry& e : catalog) {
    out.push_back({{"id", e.id}, {"label", e.label}, {"mass", e.mass}});
  }
  return out;
}

std::vector<CatalogEntry> catalog_from_json(const json& j) {
  if (!j.is_array()) throw ConfigError("catalog must be an array");
  std::vector<CatalogEntry> out;
  try {
    for (const json& e : j) {
      CatalogEntry c;
      if (e.is_string()) {
        c.id = c.label = e.get<std::string>();
      } else {
        c.id = e.at("id").get<std::string>();
        c.label = e.value("label", c.id);
        c.mass = e.value("mass", 0.0);
      }
      out.push_back(std::move(c));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed catalog: ") + e.what());
  }
  return out;
}

StrategyParams advisor_params() {
  StrategyParams p;
  p.kind = StrategyKind::Adaptive;
  return p;
}

}  // namespace

struct AuditService::Session {
  Session(std::string id_, std::string created, const AuditConfig& cfg_, const TestDesign& design_,
          std::vector<CatalogEntry> catalog_, std::filesystem::path log_path_)
      : id(std::move(id_)),
        created_at(std::move(created)),
        cfg(cfg_),
        design(design_),
        catalog(std::move(catalog_)),
        space(catalog_space(catalog, cfg_.epsilon)),
        advisor(advisor_params(), space.size()),
        advisor_rng(fnv1a(id)),
        dual(cfg_, design_),
        log_path(std::move(log_path_)) {
    suggest();
  }

  void suggest() {
    suggestion = dual.terminal()
                     ? std::string()
                     : space.cell(next_bet(advisor, space, cfg, advisor_rng)).id;
  }

  // Caller holds mu.
  const AuditEvent& apply(const std::string& subgroup_id, Score score) {
    const std::size_t cell = space.index_of(subgroup_id);
    const AuditEvent& ev = dual.step(subgroup_id, score);
    record_observation(advisor, cell, score);
    suggest();
    return ev;
  }

  std::string id;
  std::string created_at;
  AuditConfig cfg;
  TestDesign design;
  std::vector<CatalogEntry> catalog;
  SubgroupSpace space;
  StrategyState advisor;
  Rng advisor_rng;
  DualSession dual;
  std::string suggestion;
  std::filesystem::path log_path;
  std::ofstream log;
  bool log_consistent = true;
  mutable std::mutex mu;
  mutable std::condition_variable cv;
};

AuditService::AuditService(std::filesystem::path data_dir) : data_dir_(std::move(data_dir)) {
  std::filesystem::create_directories(data_dir_);
  load_existing();
}

AuditService::~AuditService() = default;

std::filesystem::path AuditService::log_path(const std::string& session_id) const {
  return data_dir_ / (session_id + ".jsonl");
}

std::string AuditService::create_session(const AuditConfig& cfg, const TestDesign& design,
                                         std::vector<CatalogEntry> catalog) {
  cfg.validate();
  std::string id = new_session_id();
  {
    std::shared_lock lock(sessions_mutex_);
    while (sessions_.count(id)) id = new_session_id();
  }
  auto session = std::make_shared<Session>(id, utc_now(), cfg, design, std::move(catalog), log_path(id));

  const json meta{{"session_id", session->id},
                  {"created_at", session->created_at},
                  {"cfg", config_to_json(cfg)},
                  {"design", design_to_json(design)},
                  {"catalog", catalog_json(session->catalog)}};
  {
    std::ofstream out(data_dir_ / (id + ".session.json"), std::ios::trunc);
    out << meta.dump(2) << '\n';
    if (!out) throw std::runtime_error("cannot write session metadata for " + id);
  }
  session->log.open(session->log_path, std::ios::app);
  if (!session->log) throw std::runtime_error("cannot open session log for " + id);

  std::unique_lock lock(sessions_mutex_);
  sessions_.emplace(id, std::move(session));
  return id;
}

std::shared_ptr<AuditService::Session> AuditService::find(const std::string& session_id) const {
  std::shared_lock lock(sessions_mutex_);
  const auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw NotFoundError("unknown session '" + session_id + "'");
  return it->second;
}

json AuditService::summary(const Session& s) const {
  const auto& model = s.dual.model_process();
  const auto& auditor = s.dual.auditor_process();
  json j{{"session_id", s.id},
         {"created_at", s.created_at},
         {"cfg", config_to_json(s.cfg)},
         {"design", design_to_json(s.design)},
         {"catalog", catalog_json(s.catalog)},
         {"t", s.dual.steps()},
         {"model_wealth", model.wealth()},
         {"auditor_wealth", auditor.wealth()},
         {"model_log_wealth", model.log_wealth},
         {"auditor_log_wealth", auditor.log_wealth},
         {"threshold", s.cfg.threshold()},
         {"forecast_model", nullptr},
         {"forecast_auditor", nullptr},
         {"verdict", std::string(to_string(s.dual.verdict()))},
         {"suggested_next_bet", nullptr},
         {"log_consistent", s.log_consistent}};
  if (auto f = s.dual.pending_forecast_model()) j["forecast_model"] = *f;
  if (auto f = s.dual.pending_forecast_auditor()) j["forecast_auditor"] = *f;
  if (!s.suggestion.empty()) j["suggested_next_bet"] = s.suggestion;
  return j;
}

json AuditService::submit_observation(const std::string& session_id,
                                      const std::string& subgroup_id, std::int64_t score) {
  const std::shared_ptr<Session> s = find(session_id);
  const Score y = Score::from_int(score);
  std::lock_guard lock(s->mu);
  if (s->dual.terminal()) {
    throw ConflictError("session already reached verdict " +
                        std::string(to_string(s->dual.verdict())));
  }
  if (!s->space.find(subgroup_id)) {
    throw DomainError("unknown subgroup '" + subgroup_id + "'");
  }
  const AuditEvent& ev = s->apply(subgroup_id, y);
  write_event_line(s->log, ev);
  s->log.flush();
  json out = summary(*s);
  out["event"] = event_to_json(ev);
  s->cv.notify_all();
  return out;
}

json AuditService::get_state(const std::string& session_id) const {
  const std::shared_ptr<Session> s = find(session_id);
  std::lock_guard lock(s->mu);
  return summary(*s);
}

json AuditService::list_sessions() const {
  std::vector<std::shared_ptr<Session>> all;
  {
    std::shared_lock lock(sessions_mutex_);
    for (const auto& [id, s] : sessions_) all.push_back(s);
  }
  json out = json::array();
  for (const auto& s : all) {
    std::lock_guard lock(s->mu);
    out.push_back({{"session_id", s->id},
                   {"created_at", s->created_at},
                   {"t", s->dual.steps()},
                   {"verdict", std::string(to_string(s->dual.verdict()))}});
  }
  return out;
}

AuditService::EventBatch AuditService::events_from(const std::string& session_id, std::size_t from,
                                                   std::chrono::milliseconds wait) const {
  const std::shared_ptr<Session> s = find(session_id);
  std::unique_lock lock(s->mu);
  if (wait.count() > 0) {
    s->cv.wait_for(lock, wait, [&] {
      return s->dual.history().size() > from || s->dual.terminal();
    });
  }
  EventBatch batch;
  const auto& history = s->dual.history();
  for (std::size_t i = from; i < history.size(); ++i) batch.events.push_back(history[i]);
  batch.terminal = s->dual.terminal();
  batch.total = history.size();
  return batch;
}

std::pair<double, double> AuditService::log_wealths(const std::string& session_id) const {
  const std::shared_ptr<Session> s = find(session_id);
  std::lock_guard lock(s->mu);
  return {s->dual.model_process().log_wealth, s->dual.auditor_process().log_wealth};
}

void AuditService::load_existing() {
  for (const auto& entry : std::filesystem::directory_iterator(data_dir_)) {
    const std::string name = entry.path().filename().string();
    const std::string suffix = ".session.json";
    if (name.size() <= suffix.size() || name.compare(name.size() - suffix.size(), suffix.size(), suffix) != 0) {
      continue;
    }
    std::ifstream meta_in(entry.path());
    const json meta = json::parse(meta_in);
    const std::string id = meta.at("session_id").get<std::string>();
    auto session = std::make_shared<Session>(
        id, meta.value("created_at", std::string()), config_from_json(meta.at("cfg")),
        design_from_json(meta.at("design")), catalog_from_json(meta.at("catalog")), log_path(id));

    // A crash can leave a torn final line; everything before it is kept.
    std::vector<AuditEvent> events;
    {
      std::ifstream log_in(session->log_path);
      std::string line;
      while (std::getline(log_in, line)) {
        if (line.empty()) continue;
        try {
          events.push_back(event_from_json(json::parse(line)));
        } catch (const std::exception&) {
          break;
        }
      }
    }
    for (std::size_t i = 0; i < events.size(); ++i) {
      const AuditEvent& logged = events[i];
      if (session->dual.terminal()) {
        events.resize(i);
        break;
      }
      const AuditEvent& live = session->apply(logged.subgroup_id, logged.score);
      if (live.model_wealth != logged.model_wealth || live.auditor_wealth != logged.auditor_wealth) {
        session->log_consistent = false;
      }
    }
    // Rewrite so that a torn tail never sits between old and new records.
    {
      std::ofstream out(session->log_path, std::ios::trunc);
      for (const AuditEvent& ev : events) write_event_line(out, ev);
    }
    session->log.open(session->log_path, std::ios::app);
    sessions_.emplace(id, std::move(session));
  }
}

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

template <typename F>
void guarded(httplib::Response& res, F&& body) {
  try {
    body();
  } catch (const NotFoundError& e) {
    send_json(res, 404, {{"error", e.what()}});
  } catch (const ConflictError& e) {
    send_json(res, 409, {{"error", e.what()}});
  } catch (const std::invalid_argument& e) {
    send_json(res, 400, {{"error", e.what()}});
  } catch (const std::out_of_range& e) {
    send_json(res, 400, {{"error", e.what()}});
  } catch (const DomainError& e) {
    send_json(res, 400, {{"error", e.what()}});
  } catch (const json::exception& e) {
    send_json(res, 400, {{"error", std::string("bad request body: ") + e.what()}});
  } catch (const std::exception& e) {
    send_json(res, 500, {{"error", e.what()}});
  }
}

std::string sse_message(const AuditEvent& ev) {
  return "id: " + std::to_string(ev.t) + "\nevent: audit_event\ndata: " + event_to_json(ev).dump() +
         "\n\n";
}

}  // namespace

void mount_routes(httplib::Server& server, AuditService& service) {
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
  server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type, Last-Event-ID");
    res.status = 204;
  });

  server.Get("/sessions", [&service](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, service.list_sessions()); });
  });

  server.Post("/sessions", [&service](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const json body = json::parse(req.body);
      const AuditConfig cfg = config_from_json(body.value("cfg", json::object()));
      const TestDesign design = body.contains("design") ? design_from_json(body.at("design")) : TestDesign{};
      auto catalog = catalog_from_json(body.at("catalog"));
      const std::string id = service.create_session(cfg, design, std::move(catalog));
      send_json(res, 201, service.get_state(id));
    });
  });

  server.Get(R"(/sessions/([A-Za-z0-9_-]+))", [&service](const httplib::Request& req,
                                                         httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, service.get_state(req.matches[1])); });
  });

  server.Post(R"(/sessions/([A-Za-z0-9_-]+)/observations)",
              [&service](const httplib::Request& req, httplib::Response& res) {
                guarded(res, [&] {
                  const json body = json::parse(req.body);
                  const json& score = body.at("score");
                  if (!score.is_number_integer()) throw DomainError("score must be 0 or 1");
                  send_json(res, 200,
                            service.submit_observation(req.matches[1],
                                                       body.at("subgroup_id").get<std::string>(),
                                                       score.get<std::int64_t>()));
                });
              });

  server.Get(R"(/sessions/([A-Za-z0-9_-]+)/events)", [&service](const httplib::Request& req,
                                                                httplib::Response& res) {
    guarded(res, [&] {
      const std::string id = req.matches[1];
      // Resume point: events with t > from (or Last-Event-ID) are delivered.
      std::size_t from = 0;
      if (req.has_param("from")) from = std::stoul(req.get_param_value("from"));
      if (req.has_header("Last-Event-ID")) from = std::stoul(req.get_header_value("Last-Event-ID"));
      service.get_state(id);  // 404 before the stream starts
      res.set_header("Cache-Control", "no-cache");
      res.set_chunked_content_provider(
          "text/event-stream",
          [&service, id, next = from](std::size_t, httplib::DataSink& sink) mutable {
            const auto batch = service.events_from(id, next, std::chrono::milliseconds(500));
            for (const AuditEvent& ev : batch.events) {
              const std::string msg = sse_message(ev);
              if (!sink.write(msg.data(), msg.size())) return false;
              ++next;
            }
            if (batch.terminal && next >= batch.total) {
              const std::string verdict = service.get_state(id).at("verdict").get<std::string>();
              const std::string end = "event: end\ndata: {\"verdict\":\"" + verdict + "\"}\n\n";
              sink.write(end.data(), end.size());
              sink.done();
            }
            return true;
          });
    });
  });
}

int serve(AuditService& service, const std::string& host, int port) {
  httplib::Server server;
  mount_routes(server, service);
  return server.listen(host, port) ? 0 : 1;
}

}  // namespace savi
