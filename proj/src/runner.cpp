#include "rdc/runner.hpp"

#include "rdc/digest.hpp"
#include "rdc/errors.hpp"
#include "rdc/render.hpp"
#include "rdc/simulation.hpp"

#include <yaml-cpp/yaml.h>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

namespace rdc {

std::string_view to_string(RunStatus s) { return s == RunStatus::completed ? "completed" : "failed"; }

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t secs = std::chrono::system_clock::to_time_t(now);
  const auto micros =
      std::chrono::duration_cast<std::chrono::microseconds>(now.time_since_epoch()).count() %
      1000000;
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%06lldZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec,
                static_cast<long long>(micros));
  return buf;
}

void RunRecord::validate() const {
  scenario.validate();
  if (scenario_hash != rdc::scenario_hash(scenario)) {
    throw ValidationError("record: scenario_hash does not match the embedded scenario");
  }
  for (const DetectorRegion& d : scenario.detectors) {
    if (!detector_outcomes.count(d.name)) {
      throw ValidationError("record: no outcome for detector '" + d.name + "'");
    }
  }
  if (detector_outcomes.size() != scenario.detectors.size()) {
    throw ValidationError("record: outcome for an undeclared detector");
  }
}

namespace {

std::string yaml_quoted(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\x%02x", static_cast<unsigned char>(c));
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out + "\"";
}

}  // namespace

std::string serialize_record(const RunRecord& r) {
  std::ostringstream out;
  out << "record_version: " << kRecordFormatVersion << '\n';
  out << "status: " << to_string(r.status) << '\n';
  out << "error: " << yaml_quoted(r.error) << '\n';
  out << "scenario_hash: " << yaml_quoted(r.scenario_hash) << '\n';
  out << "engine_version: " << yaml_quoted(r.engine_version) << '\n';
  out << "started_at: " << yaml_quoted(r.started_at) << '\n';
  out << "wall_time_seconds: " << format_double(r.wall_time_seconds) << '\n';
  out << "final_step: " << r.final_step << '\n';
  out << "field_checksum: " << yaml_quoted(r.field_checksum) << '\n';
  if (r.detector_outcomes.empty()) {
    out << "detector_outcomes: []\n";
  } else {
    out << "detector_outcomes:\n";
    for (const auto& [name, o] : r.detector_outcomes) {
      out << "  - {name: " << yaml_quoted(name) << ", fired: " << (o.fired ? "true" : "false")
          << ", first_fire_step: "
          << (o.first_fire_step ? std::to_string(*o.first_fire_step) : "null") << "}\n";
    }
  }
  if (r.output_files.empty()) {
    out << "output_files: []\n";
  } else {
    out << "output_files:\n";
    for (const OutputFile& f : r.output_files) {
      out << "  - {path: " << yaml_quoted(f.path) << ", sha256: " << yaml_quoted(f.sha256) << "}\n";
    }
  }
  out << "scenario:\n" << serialize_scenario_body(r.scenario, 2);
  return out.str();
}

namespace {

[[noreturn]] void bad(const YAML::Node& n, const std::string& msg) {
  throw ValidationError("line " + std::to_string(n.Mark().line + 1) + ": " + msg);
}

YAML::Node field(const YAML::Node& map, const char* key) {
  const YAML::Node n = map[key];
  if (!n) bad(map, std::string("missing field '") + key + "'");
  return n;
}

template <typename T>
T as(const YAML::Node& n, const char* what) {
  if (!n.IsScalar()) bad(n, std::string("'") + what + "' must be a scalar");
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    bad(n, std::string("bad value for '") + what + "': '" + n.Scalar() + "'");
  }
}

void only_keys(const YAML::Node& map, const std::set<std::string>& allowed) {
  for (const auto& kv : map) {
    if (!allowed.count(kv.first.Scalar())) {
      bad(kv.first, "unknown field '" + kv.first.Scalar() + "'");
    }
  }
}

}  // namespace

RunRecord parse_record(std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw ValidationError("line " + std::to_string(e.mark.line + 1) + ": syntax error: " + e.msg);
  }
  if (!root || !root.IsMap()) throw ValidationError("line 1: record must be a mapping");
  only_keys(root, {"record_version", "status", "error", "scenario_hash", "engine_version",
                   "started_at", "wall_time_seconds", "final_step", "field_checksum",
                   "detector_outcomes", "output_files", "scenario"});
  const YAML::Node version = field(root, "record_version");
  if (as<int>(version, "record_version") != kRecordFormatVersion) {
    bad(version, "unsupported record_version");
  }
  RunRecord r;
  const YAML::Node status = field(root, "status");
  const std::string st = as<std::string>(status, "status");
  if (st == "completed") {
    r.status = RunStatus::completed;
  } else if (st == "failed") {
    r.status = RunStatus::failed;
  } else {
    bad(status, "status must be completed or failed");
  }
  r.error = as<std::string>(field(root, "error"), "error");
  r.scenario_hash = as<std::string>(field(root, "scenario_hash"), "scenario_hash");
  r.engine_version = as<std::string>(field(root, "engine_version"), "engine_version");
  r.started_at = as<std::string>(field(root, "started_at"), "started_at");
  r.wall_time_seconds = as<double>(field(root, "wall_time_seconds"), "wall_time_seconds");
  r.final_step = as<long long>(field(root, "final_step"), "final_step");
  r.field_checksum = as<std::string>(field(root, "field_checksum"), "field_checksum");

  const YAML::Node outcomes = field(root, "detector_outcomes");
  if (!outcomes.IsSequence()) bad(outcomes, "detector_outcomes must be a list");
  for (const YAML::Node& item : outcomes) {
    only_keys(item, {"name", "fired", "first_fire_step"});
    DetectorOutcome o;
    o.fired = as<bool>(field(item, "fired"), "fired");
    const YAML::Node first = field(item, "first_fire_step");
    if (!first.IsNull()) o.first_fire_step = as<long long>(first, "first_fire_step");
    if (o.fired != o.first_fire_step.has_value()) {
      bad(item, "fired and first_fire_step disagree");
    }
    const std::string name = as<std::string>(field(item, "name"), "name");
    if (!r.detector_outcomes.emplace(name, o).second) bad(item, "duplicate outcome '" + name + "'");
  }

  const YAML::Node files = field(root, "output_files");
  if (!files.IsSequence()) bad(files, "output_files must be a list");
  for (const YAML::Node& item : files) {
    only_keys(item, {"path", "sha256"});
    r.output_files.push_back({as<std::string>(field(item, "path"), "path"),
                              as<std::string>(field(item, "sha256"), "sha256")});
  }

  const YAML::Node scenario = field(root, "scenario");
  r.scenario = scenario_from_node(scenario);
  try {
    r.validate();
  } catch (const ValidationError& e) {
    bad(root, e.what());
  }
  return r;
}

RunRecord load_record(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_record(buf.str());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

RunRecord execute(const Scenario& scenario, const std::filesystem::path& out_dir,
                  const ExecuteOptions& options) {
  scenario.validate();
  RunRecord record;
  record.scenario = scenario;
  record.scenario_hash = scenario_hash(scenario);
  record.started_at = utc_timestamp();
  for (const DetectorRegion& d : scenario.detectors) record.detector_outcomes[d.name] = {};
  const auto t0 = std::chrono::steady_clock::now();

  std::optional<Simulation> sim;
  const auto write_image = [&](const RGBImage& img, std::int64_t step, ImageKind kind) {
    const std::string name = image_file_name(record.scenario_hash, step, kind);
    write_png(img, out_dir / name);
    record.output_files.push_back({name, sha256_file(out_dir / name)});
  };

  try {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

    sim.emplace(scenario, options.threads, options.kernel);
    std::size_t next_event = 0;
    std::size_t next_snapshot = 0;
    std::int64_t k = 0;
    while (true) {
      while (next_event < scenario.events.size() && scenario.events[next_event].step == k) {
        const StimulusEvent& e = scenario.events[next_event++];
        sim->stimulate(e.center, e.radius);
      }
      if (next_snapshot < scenario.snapshot_steps.size() &&
          scenario.snapshot_steps[next_snapshot] == k) {
        write_image(sim->snapshot(), k, ImageKind::snapshot);
        ++next_snapshot;
      }
      if (k == scenario.total_steps) break;
      std::int64_t next = scenario.total_steps;
      if (next_event < scenario.events.size()) next = std::min(next, scenario.events[next_event].step);
      if (next_snapshot < scenario.snapshot_steps.size()) {
        next = std::min(next, scenario.snapshot_steps[next_snapshot]);
      }
      if (options.progress) {
        // Report in detector-stride chunks without changing the integration order.
        while (sim->step() < next) {
          const std::int64_t chunk =
              std::min(next, (sim->step() / scenario.detector_stride + 1) * scenario.detector_stride);
          sim->advance_to(chunk);
          options.progress(sim->step());
        }
      } else {
        sim->advance_to(next);
      }
      k = next;
    }
    sim->observe();
    if (scenario.timelapse_stride) {
      write_image(sim->timelapse_image(), scenario.total_steps, ImageKind::timelapse);
    }
    record.status = RunStatus::completed;
  } catch (const NumericalError& e) {
    record.status = RunStatus::failed;
    record.error = std::string("simulation diverged: ") + e.what();
  } catch (const IoError& e) {
    record.status = RunStatus::failed;
    record.error = std::string("i/o failure: ") + e.what();
  }

  if (sim) {
    for (const auto& [name, o] : sim->outcomes()) record.detector_outcomes[name] = o;
    record.final_step = sim->step();
    record.field_checksum = sim->checksum();
  }
  record.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return record;
}

ReproductionCheck reproduce(const RunRecord& record, const std::filesystem::path& out_dir,
                            const ExecuteOptions& options) {
  ReproductionCheck check;
  check.hash_matches = scenario_hash(record.scenario) == record.scenario_hash;
  check.rerun = execute(record.scenario, out_dir, options);
  check.outcomes_match = check.rerun.detector_outcomes == record.detector_outcomes;
  check.images_match = check.rerun.output_files == record.output_files;
  check.checksum_matches = check.rerun.field_checksum == record.field_checksum;
  return check;
}

}  // namespace rdc
