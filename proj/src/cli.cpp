#include "rdc/cli.hpp"

#include "rdc/catalog.hpp"
#include "rdc/circuits.hpp"
#include "rdc/digest.hpp"
#include "rdc/errors.hpp"
#include "rdc/ledger.hpp"
#include "rdc/runner.hpp"
#include "rdc/server.hpp"
#include "rdc/simulation.hpp"

#include <CLI11.hpp>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <csignal>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

namespace rdc {

namespace {

namespace fs = std::filesystem;

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop = true; }

void emit_outcomes(YAML::Emitter& y, const DetectorOutcomes& outcomes) {
  y << YAML::Key << "detectors" << YAML::Value << YAML::BeginMap;
  for (const auto& [name, o] : outcomes) {
    y << YAML::Key << name << YAML::Value << YAML::Flow << YAML::BeginMap;
    y << YAML::Key << "fired" << YAML::Value << o.fired;
    y << YAML::Key << "first_fire_step" << YAML::Value;
    if (o.first_fire_step) {
      y << *o.first_fire_step;
    } else {
      y << YAML::Null;
    }
    y << YAML::EndMap;
  }
  y << YAML::EndMap;
}

void emit_record(YAML::Emitter& y, const RunRecord& r) {
  y << YAML::Key << "scenario" << YAML::Value << r.scenario.name;
  y << YAML::Key << "scenario_hash" << YAML::Value << r.scenario_hash;
  y << YAML::Key << "precision" << YAML::Value << static_cast<int>(r.scenario.precision);
  y << YAML::Key << "status" << YAML::Value << std::string(to_string(r.status));
  if (!r.error.empty()) y << YAML::Key << "error" << YAML::Value << r.error;
  y << YAML::Key << "final_step" << YAML::Value << r.final_step;
  y << YAML::Key << "field_checksum" << YAML::Value << r.field_checksum;
  emit_outcomes(y, r.detector_outcomes);
  y << YAML::Key << "outputs" << YAML::Value << YAML::BeginSeq;
  for (const OutputFile& f : r.output_files) {
    y << YAML::Flow << YAML::BeginMap << YAML::Key << "path" << YAML::Value << f.path
      << YAML::Key << "sha256" << YAML::Value << f.sha256 << YAML::EndMap;
  }
  y << YAML::EndSeq;
  y << YAML::Key << "wall_time_seconds" << YAML::Value << r.wall_time_seconds;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

bool looks_like_record(const std::string& text) {
  try {
    const YAML::Node root = YAML::Load(text);
    return root.IsMap() && root["scenario_hash"];
  } catch (const YAML::Exception&) {
    return false;
  }
}

struct RunArgs {
  std::string file;
  std::string out;
  std::string ledger;
  std::optional<std::int64_t> steps;
  std::optional<int> precision;
  int threads = 0;
};

int cmd_run(const RunArgs& a, std::ostream& out) {
  const std::string text = read_text(a.file);
  YAML::Emitter y;
  y.SetDoublePrecision(6);
  y << YAML::BeginMap << YAML::Key << "command" << YAML::Value << "run";
  ExecuteOptions opt;
  opt.threads = a.threads;

  if (looks_like_record(text)) {
    if (a.steps || a.precision) throw ValidationError("--steps and --precision do not apply to a record");
    RunRecord recorded;
    try {
      recorded = parse_record(text);
    } catch (const ValidationError& e) {
      throw ValidationError(a.file + ": " + e.what());
    }
    const ReproductionCheck check = reproduce(recorded, a.out, opt);
    y << YAML::Key << "reproduces" << YAML::Value << a.file;
    emit_record(y, check.rerun);
    y << YAML::Key << "reproduction" << YAML::Value << YAML::BeginMap;
    y << YAML::Key << "hash_matches" << YAML::Value << check.hash_matches;
    y << YAML::Key << "outcomes_match" << YAML::Value << check.outcomes_match;
    y << YAML::Key << "images_match" << YAML::Value << check.images_match;
    y << YAML::Key << "checksum_matches" << YAML::Value << check.checksum_matches;
    y << YAML::EndMap;
    y << YAML::Key << "result" << YAML::Value << (check.ok() ? "match" : "mismatch") << YAML::EndMap;
    out << y.c_str() << "\n";
    if (check.rerun.status == RunStatus::failed) return kExitRuntime;
    return check.ok() ? kExitOk : kExitMismatch;
  }

  Scenario s;
  try {
    s = parse_scenario(text);
  } catch (const ValidationError& e) {
    throw ValidationError(a.file + ": " + e.what());
  }
  if (a.precision) {
    if (*a.precision != 32 && *a.precision != 64) throw ValidationError("--precision must be 32 or 64");
    s.precision = *a.precision == 32 ? Precision::f32 : Precision::f64;
  }
  if (a.steps) {
    if (*a.steps < 0) throw ValidationError("--steps must be >= 0");
    s = with_total_steps(s, *a.steps);
  }

  const RunRecord record = execute(s, a.out, opt);
  emit_record(y, record);
  if (!a.ledger.empty()) {
    ResultLedger ledger(a.ledger);
    const LedgerEntry entry = ledger.append(record);
    y << YAML::Key << "ledger_record" << YAML::Value << (ledger.records_dir() / entry.file).string();
    y << YAML::Key << "ledger_record_sha256" << YAML::Value << entry.sha256;
  }
  y << YAML::EndMap;
  out << y.c_str() << "\n";
  return record.status == RunStatus::completed ? kExitOk : kExitRuntime;
}

struct VerifyCase {
  std::string label;
  std::set<std::string> pattern;
  std::string detector;
  bool expect_fire;
};

struct VerifyArgs {
  std::string circuit;
  std::string out;
  std::vector<std::string> patterns;
  bool sabotage = false;
  int threads = 0;
};

void move_detector_onto(CircuitBlueprint& bp, const std::string& detector, const std::string& site) {
  for (DetectorRegion& d : bp.detectors) {
    if (d.name != detector) continue;
    const Pixel c = bp.site(site).centre;
    d.rect = {c.x - d.rect.width / 2, c.y - d.rect.height / 2, d.rect.width, d.rect.height};
  }
}

int cmd_verify(const VerifyArgs& a, std::ostream& out) {
  CircuitBlueprint bp;
  std::vector<VerifyCase> cases;
  if (a.circuit == "and") {
    bp = and_gate_blueprint();
    cases = {{"00", {}, "out", false},
             {"01", {"B"}, "out", false},
             {"10", {"A"}, "out", false},
             {"11", {"A", "B"}, "out", true}};
    // Negative control: the output detector sits on input B.
    if (a.sabotage) move_detector_onto(bp, "out", "B");
  } else if (a.circuit == "diode") {
    bp = diode_blueprint();
    cases = {{"forward", {"anode"}, "cathode", true}, {"reverse", {"cathode"}, "anode", false}};
    if (a.sabotage) move_detector_onto(bp, "anode", "cathode");
  } else {
    throw ValidationError("unknown circuit '" + a.circuit + "' (expected and or diode)");
  }
  for (const std::string& p : a.patterns) {
    if (std::none_of(cases.begin(), cases.end(), [&](const VerifyCase& c) { return c.label == p; })) {
      throw ValidationError("no pattern '" + p + "' for circuit " + a.circuit);
    }
  }

  YAML::Emitter y;
  y.SetDoublePrecision(6);
  y << YAML::BeginMap << YAML::Key << "command" << YAML::Value << "verify";
  y << YAML::Key << "circuit" << YAML::Value << bp.name;
  y << YAML::Key << "steps" << YAML::Value << bp.recommended_steps;
  y << YAML::Key << "rows" << YAML::Value << YAML::BeginSeq;
  std::vector<std::string> failing;
  bool runtime_failure = false;
  for (const VerifyCase& c : cases) {
    if (!a.patterns.empty() && std::find(a.patterns.begin(), a.patterns.end(), c.label) == a.patterns.end()) {
      continue;
    }
    const Scenario s = scenario_from_blueprint(bp, c.pattern);
    DetectorOutcome o;
    std::string status = "completed";
    if (!a.out.empty()) {
      ExecuteOptions opt;
      opt.threads = a.threads;
      const RunRecord r = execute(s, fs::path(a.out) / s.name, opt);
      o = r.detector_outcomes.at(c.detector);
      if (r.status == RunStatus::failed) {
        status = r.error;
        runtime_failure = true;
      }
    } else {
      Simulation sim(s, a.threads);
      for (const StimulusEvent& e : s.events) sim.stimulate(e.center, e.radius);
      try {
        sim.advance_to(s.total_steps);
      } catch (const NumericalError& e) {
        status = std::string("simulation diverged: ") + e.what();
        runtime_failure = true;
      }
      sim.observe();
      o = sim.outcomes().at(c.detector);
    }
    const bool match = o.fired == c.expect_fire;
    if (!match) failing.push_back(c.label);
    y << YAML::Flow << YAML::BeginMap;
    y << YAML::Key << "pattern" << YAML::Value << YAML::DoubleQuoted << c.label;
    y << YAML::Key << "detector" << YAML::Value << c.detector;
    y << YAML::Key << "expected" << YAML::Value << (c.expect_fire ? 1 : 0);
    y << YAML::Key << "observed" << YAML::Value << (o.fired ? 1 : 0);
    y << YAML::Key << "first_fire_step" << YAML::Value;
    if (o.first_fire_step) {
      y << *o.first_fire_step;
    } else {
      y << YAML::Null;
    }
    y << YAML::Key << "match" << YAML::Value << match;
    if (status != "completed") y << YAML::Key << "error" << YAML::Value << status;
    y << YAML::EndMap;
  }
  y << YAML::EndSeq;
  y << YAML::Key << "failing" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (const std::string& f : failing) y << YAML::DoubleQuoted << f;
  y << YAML::EndSeq;
  y << YAML::Key << "result" << YAML::Value << (failing.empty() && !runtime_failure ? "pass" : "fail");
  y << YAML::EndMap;
  out << y.c_str() << "\n";
  if (runtime_failure) return kExitRuntime;
  return failing.empty() ? kExitOk : kExitMismatch;
}

struct BenchArgs {
  int width = 400;
  int height = 300;
  std::int64_t steps = 1000;
  int threads = 4;
};

struct Timed {
  double steps_per_second;
  std::string checksum;
  bool finite;
};

Timed bench_one(const BenchArgs& a, KernelKind kernel, int threads) {
  const OregonatorParams params;
  SimState32 start = quiescent_state(Field32(a.width, a.height, static_cast<float>(params.phi_active)), params);
  apply_stimulus(start, {a.width / 2, a.height / 2}, std::max(1, std::min(a.width, a.height) / 20));
  Integrator<float> integ(std::move(start), params, kernel, threads);
  const auto t0 = std::chrono::steady_clock::now();
  bool finite = true;
  try {
    integ.advance(a.steps);
  } catch (const NumericalError&) {
    finite = false;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {secs > 0 ? static_cast<double>(a.steps) / secs : 0.0, field_checksum(integ.state()), finite};
}

int cmd_bench(const BenchArgs& a, std::ostream& out, std::ostream& err) {
  if (a.width < 3 || a.height < 3) throw ValidationError("--width and --height must be >= 3");
  if (a.steps < 1) throw ValidationError("--steps must be >= 1");
  if (a.threads < 1) throw ValidationError("--threads must be >= 1");
  const Timed reference = bench_one(a, KernelKind::reference, 1);
  const Timed serial = bench_one(a, KernelKind::parallel, 1);
  const Timed parallel = bench_one(a, KernelKind::parallel, a.threads);
  const bool identical = reference.checksum == serial.checksum && serial.checksum == parallel.checksum;
  const bool finite = reference.finite && serial.finite && parallel.finite;

  YAML::Emitter y;
  y.SetDoublePrecision(6);
  y << YAML::BeginMap << YAML::Key << "command" << YAML::Value << "bench";
  y << YAML::Key << "grid" << YAML::Value << YAML::Flow << std::vector<int>{a.width, a.height};
  y << YAML::Key << "steps" << YAML::Value << a.steps;
  y << YAML::Key << "precision" << YAML::Value << 32;
  y << YAML::Key << "hardware_threads" << YAML::Value << std::thread::hardware_concurrency();
  const auto row = [&](const char* name, int threads, const Timed& t) {
    y << YAML::Key << name << YAML::Value << YAML::Flow << YAML::BeginMap;
    y << YAML::Key << "threads" << YAML::Value << threads;
    y << YAML::Key << "steps_per_second" << YAML::Value << t.steps_per_second;
    y << YAML::Key << "checksum" << YAML::Value << t.checksum << YAML::EndMap;
  };
  row("reference", 1, reference);
  row("sequential", 1, serial);
  row("parallel", a.threads, parallel);
  y << YAML::Key << "speedup" << YAML::Value
    << (serial.steps_per_second > 0 ? parallel.steps_per_second / serial.steps_per_second : 0.0);
  y << YAML::Key << "finite" << YAML::Value << finite;
  y << YAML::Key << "checksums_identical" << YAML::Value << identical;
  y << YAML::EndMap;
  out << y.c_str() << "\n";
  if (!identical) {
    err << "error: parallel output differs from sequential output\n";
    return kExitRuntime;
  }
  if (!finite) {
    err << "error: non-finite values during benchmark\n";
    return kExitRuntime;
  }
  return kExitOk;
}

struct ServeArgs {
  std::string host = "127.0.0.1";
  int port = 8765;
  std::string scenario;
  std::string log_dir;
  int threads = 0;
  int downscale = 1;
  std::int64_t render_stride = 100;
};

int cmd_serve(const ServeArgs& a, std::ostream& out, std::ostream& err) {
  if (a.port < 0 || a.port > 65535) throw ValidationError("--port must lie in [0, 65535]");
  if (a.downscale < 1) throw ValidationError("--downscale must be >= 1");
  ServerOptions opt;
  opt.host = a.host;
  opt.port = a.port;
  if (a.scenario.empty()) {
    opt.initial.name = "session";
  } else {
    opt.initial = load_scenario(a.scenario);
  }
  opt.session.threads = a.threads;
  opt.session.downscale = a.downscale;
  opt.session.render_stride = a.render_stride;
  std::atomic<int> sessions{0};
  if (!a.log_dir.empty()) {
    fs::create_directories(a.log_dir);
    opt.on_session_end = [&](const SessionLog& log) {
      const fs::path path = fs::path(a.log_dir) /
                            ("session-" + utc_timestamp() + "-" + std::to_string(++sessions) + ".json");
      std::ofstream f(path);
      f << session_log_to_json(log).dump(2) << "\n";
      if (!f) err << "warning: could not write " << path.string() << "\n";
    };
  }
  opt.on_listening = [&](int port) {
    out << "listening: " << a.host << ":" << port << "\n" << std::flush;
  };
  g_stop = false;
  opt.stop = &g_stop;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  serve(opt);
  out << "stopped: true\n";
  return kExitOk;
}

int cmd_demo(const std::string& name, const std::string& out_dir, int threads, std::ostream& out) {
  const Scenario s = demo_scenario(name);
  ExecuteOptions opt;
  opt.threads = threads;
  const RunRecord r = execute(s, out_dir, opt);
  YAML::Emitter y;
  y.SetDoublePrecision(6);
  y << YAML::BeginMap << YAML::Key << "command" << YAML::Value << "demo";
  emit_record(y, r);
  y << YAML::EndMap;
  out << y.c_str() << "\n";
  return r.status == RunStatus::completed ? kExitOk : kExitRuntime;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Reaction-diffusion computing simulator", "rdcsim"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", std::string(kEngineVersion));

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Execute a scenario file, or re-execute a ledger record");
  run_cmd->add_option("file", run.file, "scenario (.rdc) or ledger record (.yaml)")->required();
  run_cmd->add_option("--out", run.out, "output directory")->required();
  run_cmd->add_option("--ledger", run.ledger, "append the run record to this ledger");
  run_cmd->add_option("--steps", run.steps, "override total_steps");
  run_cmd->add_option("--precision", run.precision, "32 or 64");
  run_cmd->add_option("--threads", run.threads, "worker threads (0: OpenMP default)");

  VerifyArgs verify;
  auto* verify_cmd = app.add_subcommand("verify", "Run a circuit's truth table against its frozen blueprint");
  verify_cmd->add_option("circuit", verify.circuit, "and | diode")->required();
  verify_cmd->add_option("--out", verify.out, "write each pattern's images under this directory");
  verify_cmd->add_option("--pattern", verify.patterns, "only these patterns (repeatable)");
  verify_cmd->add_option("--threads", verify.threads, "worker threads (0: OpenMP default)");
  verify_cmd->add_flag("--sabotage", verify.sabotage)->group("");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Sequential vs parallel stepping throughput");
  bench_cmd->add_option("--width", bench.width);
  bench_cmd->add_option("--height", bench.height);
  bench_cmd->add_option("--steps", bench.steps);
  bench_cmd->add_option("--threads", bench.threads);

  ServeArgs serve_args;
  auto* serve_cmd = app.add_subcommand("serve", "Host interactive sessions over TCP");
  serve_cmd->add_option("--port", serve_args.port, "0 picks a free port")->required();
  serve_cmd->add_option("--host", serve_args.host);
  serve_cmd->add_option("--scenario", serve_args.scenario, "initial scenario (default: blank 400x300)");
  serve_cmd->add_option("--log-dir", serve_args.log_dir, "write each session log here as JSON");
  serve_cmd->add_option("--threads", serve_args.threads);
  serve_cmd->add_option("--downscale", serve_args.downscale, "frame subsampling factor");
  serve_cmd->add_option("--render-stride", serve_args.render_stride, "initial steps per frame");

  std::string demo_name;
  std::string demo_out;
  int demo_threads = 0;
  auto* demo_cmd = app.add_subcommand("demo", "Run a built-in demo scenario");
  demo_cmd->add_option("name", demo_name, "spiral | target")->required();
  demo_cmd->add_option("--out", demo_out, "output directory")->required();
  demo_cmd->add_option("--threads", demo_threads);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*run_cmd) return cmd_run(run, out);
    if (*verify_cmd) return cmd_verify(verify, out);
    if (*bench_cmd) return cmd_bench(bench, out, err);
    if (*serve_cmd) return cmd_serve(serve_args, out, err);
    if (*demo_cmd) return cmd_demo(demo_name, demo_out, demo_threads, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitValidation;
}

}  // namespace rdc
