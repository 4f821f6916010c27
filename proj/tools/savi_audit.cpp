// savi-audit: batch Monte Carlo runs, log replay, and the live audit service.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "savi/harness.hpp"
#include "savi/json_io.hpp"
#include "savi/service.hpp"

namespace {

constexpr int kConfigErrorExit = 2;

int run_command(const std::string& spec_path, const std::string& out_dir, const std::string& format_name,
                std::optional<int> parallelism) {
  savi::ExperimentSpec spec;
  savi::ReportFormat format;
  try {
    format = savi::parse_report_format(format_name);
    std::ifstream in(spec_path);
    if (!in) throw savi::ConfigError("cannot open spec file " + spec_path);
    spec = savi::experiment_spec_from_json(savi::json::parse(in));
    if (parallelism) spec.parallelism = *parallelism;
    spec.validate();
  } catch (const savi::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigErrorExit;
  } catch (const savi::json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigErrorExit;
  }

  const savi::ExperimentReport report = savi::run_experiment(spec);
  std::filesystem::create_directories(out_dir);
  const auto path = std::filesystem::path(out_dir) /
                    (format == savi::ReportFormat::Json ? "report.json" : "report.csv");
  std::ofstream out(path);
  out << savi::emit_report(report, format);
  if (!out) {
    std::cerr << "cannot write " << path << '\n';
    return 1;
  }
  std::cout << savi::emit_report(report, savi::ReportFormat::Csv);
  std::cerr << "wrote " << path.string() << '\n';
  return 0;
}

// Looks for <id>.session.json next to <id>.jsonl when --config is not given.
std::optional<std::filesystem::path> sibling_metadata(const std::filesystem::path& log) {
  auto candidate = log;
  candidate.replace_extension(".session.json");
  if (std::filesystem::exists(candidate)) return candidate;
  return std::nullopt;
}

int replay_command(const std::string& log_path, const std::string& config_path) {
  savi::AuditConfig cfg;
  savi::TestDesign design;
  try {
    std::optional<std::filesystem::path> meta_path;
    if (!config_path.empty()) {
      meta_path = config_path;
    } else {
      meta_path = sibling_metadata(log_path);
    }
    if (meta_path) {
      std::ifstream in(*meta_path);
      if (!in) throw savi::ConfigError("cannot open " + meta_path->string());
      const savi::json meta = savi::json::parse(in);
      cfg = savi::config_from_json(meta.value("cfg", savi::json::object()));
      if (meta.contains("design")) design = savi::design_from_json(meta.at("design"));
    }
  } catch (const savi::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigErrorExit;
  } catch (const savi::json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigErrorExit;
  }

  std::ifstream in(log_path);
  if (!in) {
    std::cerr << "cannot open " << log_path << '\n';
    return kConfigErrorExit;
  }
  std::vector<savi::AuditEvent> events;
  try {
    events = savi::read_events(in);
  } catch (const savi::DomainError& e) {
    std::cerr << "malformed log: " << e.what() << '\n';
    return 1;
  }

  const auto mismatch = savi::first_replay_mismatch(cfg, design, events);
  const savi::DualSession session =
      savi::replay(cfg, design, std::span(events.data(), mismatch ? *mismatch : events.size()));
  std::cout << "t,model_wealth,auditor_wealth\n";
  std::cout.precision(17);
  for (const savi::WealthPoint& p : savi::wealth_trace(session)) {
    std::cout << p.t << ',' << p.model_wealth << ',' << p.auditor_wealth << '\n';
  }
  std::cout << "verdict: " << savi::to_string(session.verdict()) << '\n';
  std::cout << "model_log_wealth: " << session.model_process().log_wealth << '\n';
  std::cout << "auditor_log_wealth: " << session.auditor_process().log_wealth << '\n';
  if (mismatch) {
    std::cerr << "log diverges from replay at event index " << *mismatch << '\n';
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Anytime-valid dual auditing: Monte Carlo runs, log replay and live sessions"};
  app.require_subcommand(1);

  std::string spec_path;
  std::string out_dir = ".";
  std::string format = "json";
  std::optional<int> parallelism;
  auto* run = app.add_subcommand("run", "Run a Monte Carlo experiment from a JSON spec");
  run->add_option("--spec", spec_path, "Experiment spec (JSON)")->required();
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--format", format, "json or csv");
  run->add_option("--parallelism", parallelism, "Concurrent replicates");

  std::string log_path;
  std::string config_path;
  auto* replay = app.add_subcommand("replay", "Replay a JSONL session log and check its wealths");
  replay->add_option("--log", log_path, "Session log (JSON lines)")->required();
  replay->add_option("--config", config_path,
                     "Session metadata with cfg/design (default: <log stem>.session.json)");

  int port = 8080;
  std::string host = "0.0.0.0";
  std::string data_dir;
  auto* serve = app.add_subcommand("serve", "Host live audit sessions over HTTP");
  serve->add_option("--port", port, "Listen port");
  serve->add_option("--host", host, "Listen address");
  serve->add_option("--data-dir", data_dir, "Session storage (default: $SAVI_DATA_DIR or ./savi-data)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kConfigErrorExit;
  }

  if (*run) return run_command(spec_path, out_dir, format, parallelism);
  if (*replay) return replay_command(log_path, config_path);
  if (*serve) {
    if (data_dir.empty()) {
      const char* env = std::getenv("SAVI_DATA_DIR");
      data_dir = env ? env : "savi-data";
    }
    savi::AuditService service(data_dir);
    std::cerr << "serving on " << host << ':' << port << " (data in " << data_dir << ")\n";
    return savi::serve(service, host, port);
  }
  return 0;
}
