// nuhf: replay scenarios, export interface graphs, serve the console API.
//
// Exit codes: 0 success, 2 usage, 3 configuration or input error,
// 4 runtime error.

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "nuhf/detail/text_util.hpp"
#include "nuhf/error.hpp"
#include "nuhf/server.hpp"
#include "nuhf/session.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitConfig = 3;
constexpr int kExitRuntime = 4;

std::atomic<bool> g_interrupted{false};

bool is_runtime_error(nuhf::ErrorCode code) {
  using nuhf::ErrorCode;
  switch (code) {
    case ErrorCode::InvalidState:
    case ErrorCode::LifecycleViolation:
    case ErrorCode::StepNotExecuted:
    case ErrorCode::UnknownApproval:
    case ErrorCode::ExpiredApproval:
    case ErrorCode::AssessorTimeout: return true;
    default: return false;
  }
}

int report_error(const nuhf::Error& ex) {
  nlohmann::ordered_json j{{"error", nuhf::to_string(ex.code())}, {"message", ex.detail()}};
  std::cerr << j.dump() << '\n';
  return is_runtime_error(ex.code()) ? kExitRuntime : kExitConfig;
}

int cmd_replay(const nuhf::ReplayOptions& options) {
  const auto report = nuhf::run_replay(options);
  std::cout << nuhf::to_json(report).dump(2) << '\n';
  return kExitOk;
}

int cmd_graph_export(const std::string& graph_path, const std::string& format, const std::string& out_path) {
  const auto graph = nuhf::IEKG::import_json(nuhf::detail::read_file(graph_path));
  const std::string text = graph.export_graph(nuhf::parse_graph_format(format));
  std::ostream* counts = &std::cout;
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
    counts = &std::cerr;
  } else {
    std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
    if (!out) throw nuhf::Error(nuhf::ErrorCode::Io, "cannot write " + out_path);
    out << text;
  }
  *counts << "nodes: " << graph.elements().size() << " edges: " << graph.edges().size() << '\n';
  return kExitOk;
}

int cmd_serve(const std::filesystem::path& config_dir, std::filesystem::path scenario_path,
              const std::string& telemetry_path, const std::string& host, int port, double speed) {
  if (scenario_path.empty()) scenario_path = config_dir / "scenario.json";
  auto scenario = std::make_shared<const nuhf::Scenario>(nuhf::load_scenario(scenario_path, config_dir));
  std::optional<nuhf::TelemetryStream> stream;
  if (!telemetry_path.empty()) stream = nuhf::load_telemetry(telemetry_path, *scenario);

  auto audit = std::make_shared<nuhf::AuditLog>();
  nuhf::RuntimeService service(std::make_unique<nuhf::Session>(scenario, audit));
  nuhf::ApiServer server(service);
  const int bound = server.bind(host, port);
  server.start();
  std::cerr << "serving " << scenario->id << " on http://" << host << ':' << bound << '\n';

  std::optional<nuhf::TelemetryFeeder> feeder;
  if (stream) {
    feeder.emplace(service, std::move(*stream), speed);
    feeder->start();
  }

  std::signal(SIGINT, [](int) { g_interrupted = true; });
  std::signal(SIGTERM, [](int) { g_interrupted = true; });
  bool reported = false;
  while (!g_interrupted) {
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
    if (feeder && !reported && feeder->done() && !feeder->error().empty()) {
      std::cerr << "replay stopped: " << feeder->error() << '\n';
      reported = true;
    }
  }
  if (feeder) feeder->stop();
  server.stop();
  service.stop();
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Procedure-support runtime: replay, graph export and console API"};
  app.require_subcommand(1);

  nuhf::ReplayOptions replay;
  std::string approvals;
  auto* replay_cmd = app.add_subcommand("replay", "Run a scenario headless over recorded telemetry");
  replay_cmd->add_option("--telemetry", replay.telemetry, "Telemetry CSV")->required();
  replay_cmd->add_option("--scenario", replay.scenario, "Scenario JSON")->required();
  replay_cmd->add_option("--config-dir", replay.config_dir, "Directory the scenario's file names resolve against");
  replay_cmd->add_option("--approvals", approvals, "Approvals script JSON");
  replay_cmd->add_option("--out-dir", replay.out_dir, "Where audit.jsonl and report.json go")->default_val("out");

  std::string graph_path, format = "json", out_path;
  auto* export_cmd = app.add_subcommand("graph-export", "Convert an interface graph to JSON or DOT");
  export_cmd->add_option("--graph", graph_path, "Graph JSON")->required();
  export_cmd->add_option("--format", format, "json or dot")->check(CLI::IsMember({"json", "dot"}));
  export_cmd->add_option("--out", out_path, "Output file, stdout when absent");

  std::filesystem::path serve_config, serve_scenario;
  std::string serve_telemetry, host = "127.0.0.1";
  int port = 8080;
  double speed = 1.0;
  auto* serve_cmd = app.add_subcommand("serve", "Serve the HTTP API over a live replay");
  serve_cmd->add_option("--config-dir", serve_config, "Scenario configuration directory")->required();
  serve_cmd->add_option("--scenario", serve_scenario, "Scenario JSON, <config-dir>/scenario.json by default");
  serve_cmd->add_option("--telemetry", serve_telemetry, "Telemetry CSV to replay");
  serve_cmd->add_option("--host", host, "Listen address");
  serve_cmd->add_option("--port", port, "Listen port, 0 for any")->check(CLI::Range(0, 65535));
  serve_cmd->add_option("--speed", speed, "Replay speed factor, 0 for as fast as possible")->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*replay_cmd) {
      if (replay.config_dir.empty()) replay.config_dir = replay.scenario.parent_path();
      if (!approvals.empty()) replay.approvals = approvals;
      return cmd_replay(replay);
    }
    if (*export_cmd) return cmd_graph_export(graph_path, format, out_path);
    if (*serve_cmd) return cmd_serve(serve_config, serve_scenario, serve_telemetry, host, port, speed);
  } catch (const nuhf::Error& ex) {
    return report_error(ex);
  } catch (const std::exception& ex) {
    std::cerr << nlohmann::ordered_json{{"error", "internal"}, {"message", ex.what()}}.dump() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
