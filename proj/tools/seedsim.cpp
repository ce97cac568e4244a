#include <atomic>
#include <csignal>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "seedsim/analysis/power_report.hpp"
#include "seedsim/analysis/tachometer.hpp"
#include "seedsim/error.hpp"
#include "seedsim/flight/flash_log.hpp"
#include "seedsim/ground/backend.hpp"
#include "seedsim/ground/http_api.hpp"
#include "seedsim/ground/sbd_tcp.hpp"
#include "seedsim/mission/mission.hpp"
#include "seedsim/recovery/direction_finding.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace seedsim;

namespace {

std::atomic<bool> g_stop{false};

mission::Scenario load_scenario(const std::string& spec) {
  if (spec == "builtin:nominal") return mission::nominal_scenario();
  if (spec == "builtin:prelaunch_radio_silence") return mission::prelaunch_radio_silence_scenario();
  if (spec == "builtin:wind_tunnel") return mission::wind_tunnel_scenario(false);
  if (spec == "builtin:wind_tunnel_imbalanced") return mission::wind_tunnel_scenario(true);
  return mission::Scenario::load(spec);
}

void write_file(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p);
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", p.string()));
  out << text;
}

std::vector<flight::FlashRecord> read_log(const std::string& log, const std::string& mirror) {
  std::optional<fs::path> m;
  if (!mirror.empty()) {
    m = mirror;
  } else if (fs::exists(flight::mirror_path(log))) {
    m = flight::mirror_path(log);
  }
  auto r = flight::extract_log(log, m);
  for (const auto& issue : r.issues) std::cerr << fmt::format("record {}: {}\n", issue.index, issue.error);
  return std::move(r.records);
}

int cmd_run(const std::string& scenario, double until, const std::string& out, std::optional<std::uint64_t> seed,
            bool keep_trace) {
  auto sc = load_scenario(scenario);
  if (seed) sc.seed = *seed;
  mission::MissionOptions opt;
  if (!out.empty()) opt.out_dir = fs::path(out);
  opt.keep_trace_entries = keep_trace;
  mission::Mission m(std::move(sc), opt);
  m.run_until(until > 0.0 ? until : m.scenario().duration_s);
  std::cout << m.summary().dump(2) << "\n";
  return 0;
}

int cmd_analyze_tach(const std::string& log, const std::string& mirror, const std::string& out, double rate) {
  const auto records = read_log(log, mirror);
  const auto report = analysis::validate_tachometer(analysis::tach_log_from_records(records, rate));
  const auto j = report.to_json();
  std::cout << j.dump(2) << "\n";
  if (!out.empty()) {
    write_file(fs::path(out) / "tach_report.json", j.dump(2) + "\n");
    if (report.example_spectrum) write_file(fs::path(out) / "tach_spectrum.csv", analysis::spectrum_csv(*report.example_spectrum));
  }
  return report.pass ? 0 : 2;
}

int cmd_analyze_power(const std::string& log, const std::string& mirror, const std::string& out) {
  const auto records = read_log(log, mirror);
  const auto report = analysis::power_report(records);
  const auto j = report.to_json();
  std::cout << j.dump(2) << "\n";
  if (!out.empty()) write_file(fs::path(out) / "power_report.json", j.dump(2) + "\n");
  return report.pass ? 0 : 2;
}

int cmd_extract(const std::string& log, const std::string& mirror, const std::string& csv, const std::string& js) {
  std::optional<fs::path> m;
  if (!mirror.empty()) m = mirror;
  const auto r = flight::extract_log(log, m);
  if (!csv.empty()) {
    std::string text = flight::flash_csv_header() + "\n";
    for (const auto& rec : r.records) text += flight::flash_csv_row(rec) + "\n";
    write_file(csv, text);
  }
  json issues = json::array();
  for (const auto& i : r.issues) issues.push_back({{"index", i.index}, {"copy", i.copy}, {"error", i.error}});
  const json summary{{"records", r.records.size()},
                     {"recovered_from_mirror", r.recovered_from_mirror},
                     {"lost", r.lost},
                     {"gaps", r.gaps},
                     {"issues", issues}};
  if (!js.empty()) write_file(js, summary.dump(2) + "\n");
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int cmd_serve(const std::string& store, const std::string& schema, const std::string& bind, int http_port,
              int sbd_port, const std::string& key_hex) {
  ground::BackendConfig cfg;
  if (!store.empty()) cfg.store_path = fs::path(store);
  if (!schema.empty()) cfg.schema = protocol::CodecSet::load(schema);
  if (!key_hex.empty()) cfg.uplink_key = protocol::from_hex(key_hex);
  ground::Backend backend(std::move(cfg));
  ground::HttpApi api(backend, bind);
  api.start(std::uint16_t(http_port));
  ground::SbdTcpServer sbd(backend, std::uint16_t(sbd_port), bind);
  sbd.start();
  std::cout << json{{"http_port", api.port()}, {"sbd_port", sbd.port()}, {"records", backend.store().last_seq()}}.dump()
            << std::endl;
  std::signal(SIGINT, [](int) { g_stop = true; });
  std::signal(SIGTERM, [](int) { g_stop = true; });
  while (!g_stop) {
    std::this_thread::sleep_for(std::chrono::milliseconds(200));
    backend.poll_timeouts();
  }
  sbd.stop();
  api.stop();
  return 0;
}

recovery::AntennaPattern pattern_from_json(const json& j) {
  const auto type = j.value("type", std::string("cardioid"));
  if (type == "omni") return recovery::AntennaPattern::omni();
  if (type == "yagi") return recovery::AntennaPattern::yagi_like(j.value("beamwidth_deg", 60.0), j.value("peak_gain_db", 7.0));
  if (type == "cardioid") return recovery::AntennaPattern::cardioid();
  throw Error(Errc::ScenarioError, fmt::format("unknown antenna pattern '{}'", type));
}

Vec3 vec_from_json(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.size() > 2 ? j.at(2).get<double>() : 0.0}; }

int cmd_recover(const std::string& file, const std::string& out, int trials) {
  std::ifstream in(file);
  if (!in) throw Error(Errc::ScenarioError, fmt::format("cannot open {}", file));
  const json j = json::parse(in);
  recovery::LocateParams p;
  p.step_m = j.value("step_m", p.step_m);
  p.max_steps = j.value("max_steps", p.max_steps);
  p.capture_radius_m = j.value("capture_radius_m", p.capture_radius_m);
  p.scan.step_deg = j.value("scan_step_deg", p.scan.step_deg);
  if (j.contains("pattern")) p.scan.pattern = pattern_from_json(j.at("pattern"));
  p.scan.lora.noise_sigma_db = j.value("noise_sigma_db", p.scan.lora.noise_sigma_db);
  p.scan.lora.path_loss_exponent = j.value("path_loss_exponent", p.scan.lora.path_loss_exponent);
  p.scan.lora.tx_power_dbm = j.value("tx_power_dbm", p.scan.lora.tx_power_dbm);
  const Vec3 start = vec_from_json(j.at("device"));
  const Vec3 seed = vec_from_json(j.at("seed_position"));
  const std::uint64_t rng_seed = j.value("seed", std::uint64_t{1});

  json results = json::array();
  std::size_t converged = 0;
  for (int t = 0; t < trials; ++t) {
    kernel::RngStream rng(rng_seed, fmt::format("recover.{}", t));
    const auto r = recovery::locate(start, seed, p, p.scan.lora.noise_sigma_db > 0.0 ? &rng : nullptr);
    if (r.outcome == recovery::LocateOutcome::Converged) ++converged;
    if (t == 0 && !out.empty()) write_file(out, recovery::path_csv(r));
    results.push_back({{"outcome", recovery::to_string(r.outcome)},
                       {"steps", r.steps},
                       {"final_distance_m", r.final_distance_m},
                       {"no_signal_scans", r.no_signal_scans}});
  }
  std::cout << json{{"trials", trials}, {"converged", converged}, {"runs", results}}.dump(2) << "\n";
  return converged == std::size_t(trials) ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"seedsim: seed mission simulator, ground backend and analysis tools"};
  app.require_subcommand(1);

  std::string scenario, out, log, mirror, csv, js, store, schema, bind = "127.0.0.1", key;
  double until = 0.0, rate = 250.0;
  int http_port = 8080, sbd_port = 10800, trials = 1;
  std::optional<std::uint64_t> seed;
  bool keep_trace = false;

  auto* run = app.add_subcommand("run", "Run a mission scenario");
  run->add_option("--scenario", scenario, "Scenario JSON file or builtin:<name>")->required();
  run->add_option("--until", until, "Stop time in seconds (default: scenario duration)");
  run->add_option("--out", out, "Output directory");
  run->add_option("--seed", seed, "Override the scenario RNG seed");
  run->add_flag("--keep-trace", keep_trace, "Keep trace entries in memory");

  auto* analyze = app.add_subcommand("analyze", "Post-run analysis of a flash log");
  analyze->require_subcommand(1);
  auto* tach = analyze->add_subcommand("tach", "Tachometer validation by spectral analysis");
  auto* pwr = analyze->add_subcommand("power", "Electrical performance report");
  for (auto* sub : {tach, pwr}) {
    sub->add_option("--log", log, "Flash log file")->required();
    sub->add_option("--mirror", mirror, "Mirror copy (default: <log>.mirror if present)");
    sub->add_option("--out", out, "Directory for JSON report and CSV spectra");
  }
  tach->add_option("--rate", rate, "Sample rate in Hz");

  auto* extract = app.add_subcommand("extract", "Extract a flash log to CSV and JSON");
  extract->add_option("--log", log, "Flash log file")->required();
  extract->add_option("--mirror", mirror, "Mirror copy");
  extract->add_option("--csv", csv, "CSV output file");
  extract->add_option("--json", js, "JSON summary output file");

  auto* serve = app.add_subcommand("serve", "Run the ground backend");
  serve->add_option("--store", store, "Record log file");
  serve->add_option("--schema", schema, "Message definition JSON");
  serve->add_option("--bind", bind, "Bind address");
  serve->add_option("--http-port", http_port, "HTTP port (0: ephemeral)");
  serve->add_option("--sbd-port", sbd_port, "SBD TCP port (0: ephemeral)");
  serve->add_option("--uplink-key", key, "Uplink HMAC key (hex)");

  auto* recover = app.add_subcommand("recover", "Direction-finding search for a landed seed");
  recover->add_option("--scenario", scenario, "Recovery scenario JSON")->required();
  recover->add_option("--out", out, "Path CSV of the first trial");
  recover->add_option("--trials", trials, "Number of noise realisations");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(scenario, until, out, seed, keep_trace);
    if (*tach) return cmd_analyze_tach(log, mirror, out, rate);
    if (*pwr) return cmd_analyze_power(log, mirror, out);
    if (*extract) return cmd_extract(log, mirror, csv, js);
    if (*serve) return cmd_serve(store, schema, bind, http_port, sbd_port, key);
    if (*recover) return cmd_recover(scenario, out, trials);
  } catch (const Error& e) {
    std::cerr << fmt::format("error [{}]: {}\n", to_string(e.code()), e.what());
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
