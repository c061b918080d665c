#include "rdc/scenario.hpp"

#include "rdc/digest.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <type_traits>

namespace rdc {

std::string_view to_string(InitialState s) {
  return s == InitialState::quiescent ? "quiescent" : "zero";
}

InitialState parse_initial_state(std::string_view text) {
  if (text == "quiescent") return InitialState::quiescent;
  if (text == "zero") return InitialState::zero;
  throw ValidationError("unknown initial_state '" + std::string(text) + "'");
}

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

namespace {

std::string at(const std::string& base, std::size_t i) {
  return base + "[" + std::to_string(i) + "]";
}

bool valid_name(const std::string& name) {
  return std::all_of(name.begin(), name.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
           c == '_' || c == '-' || c == '.';
  });
}

}  // namespace

void Scenario::validate() const {
  const auto fail = [](const std::string& path, const std::string& msg) {
    throw ScenarioError(path, msg);
  };
  if (format_version != kScenarioFormatVersion) {
    fail("format_version", "unsupported version " + std::to_string(format_version) +
                               " (supported: " + std::to_string(kScenarioFormatVersion) + ")");
  }
  if (!valid_name(name)) fail("name", "only letters, digits, '_', '-' and '.' are allowed");
  if (width < 3 || height < 3 || width > 8192 || height > 8192) {
    fail("grid", "extent must lie in [3, 8192] per axis");
  }
  for (auto pname : kParamNames) {
    const double value = params.*(*param_member(pname));
    if (!std::isfinite(value) || value <= 0.0) {
      fail("params." + std::string(pname), "must be finite and > 0");
    }
  }
  try {
    params.validate();
  } catch (const ValidationError& e) {
    std::string_view msg = e.what();
    if (msg.starts_with("params: ")) msg.remove_prefix(8);
    fail("params", std::string(msg));
  }

  const auto in_grid = [&](Pixel p) { return p.x >= 0 && p.y >= 0 && p.x < width && p.y < height; };
  for (std::size_t i = 0; i < strokes.size(); ++i) {
    try {
      strokes[i].validate();
    } catch (const ValidationError& e) {
      fail(at("strokes", i), e.what());
    }
    for (std::size_t j = 0; j < strokes[i].points.size(); ++j) {
      if (!in_grid(strokes[i].points[j])) fail(at(at("strokes", i) + ".points", j), "outside the grid");
    }
  }

  if (total_steps < 0) fail("total_steps", "must be >= 0");
  for (std::size_t i = 0; i < events.size(); ++i) {
    const StimulusEvent& e = events[i];
    const std::string path = at("events", i);
    if (e.step < 0 || e.step >= total_steps) {
      fail(path + ".step", "step " + std::to_string(e.step) + " outside [0, total_steps=" +
                               std::to_string(total_steps) + ")");
    }
    if (i > 0 && e.step < events[i - 1].step) fail(path + ".step", "events must be sorted by step");
    if (!in_grid(e.center)) fail(path + ".center", "outside the grid");
    if (e.radius < 0) fail(path + ".radius", "must be >= 0");
  }

  std::set<std::string> names;
  for (std::size_t i = 0; i < detectors.size(); ++i) {
    const DetectorRegion& d = detectors[i];
    const std::string path = at("detectors", i);
    if (d.name.empty() || !valid_name(d.name)) fail(path + ".name", "invalid detector name");
    if (!names.insert(d.name).second) fail(path + ".name", "duplicate detector '" + d.name + "'");
    try {
      d.validate(width, height);
    } catch (const ValidationError& e) {
      fail(path, e.what());
    }
  }
  if (detector_stride < 1) fail("detector_stride", "must be >= 1");

  for (std::size_t i = 0; i < snapshot_steps.size(); ++i) {
    const std::int64_t s = snapshot_steps[i];
    if (s < 0 || s > total_steps) fail(at("snapshot_steps", i), "outside [0, total_steps]");
    if (i > 0 && s <= snapshot_steps[i - 1]) {
      fail(at("snapshot_steps", i), "must be strictly increasing");
    }
  }
  if (timelapse_stride && *timelapse_stride < 1) fail("timelapse_stride", "must be >= 1 or null");
}

SubstrateMask Scenario::build_mask() const {
  SubstrateMask mask(width, height, background);
  for (const StrokeSpec& s : strokes) mask.apply_stroke(s);
  return mask;
}

namespace {

std::string yaml_quoted(const std::string& s) { return "\"" + s + "\""; }

std::string point(Pixel p) { return "[" + std::to_string(p.x) + ", " + std::to_string(p.y) + "]"; }

}  // namespace

std::string serialize_scenario_body(const Scenario& s, int indent) {
  const std::string pad(static_cast<std::size_t>(indent), ' ');
  std::ostringstream out;
  const auto line = [&](const std::string& text) { out << pad << text << '\n'; };

  line("format_version: " + std::to_string(s.format_version));
  line("name: " + yaml_quoted(s.name));
  line("grid:");
  line("  width: " + std::to_string(s.width));
  line("  height: " + std::to_string(s.height));
  line("precision: " + std::to_string(static_cast<int>(s.precision)));
  line("initial_state: " + std::string(to_string(s.initial_state)));
  line("params:");
  for (auto name : kParamNames) {
    line("  " + std::string(name) + ": " + format_double(s.params.*(*param_member(name))));
  }
  line("background: " + std::string(to_string(s.background)));

  if (s.strokes.empty()) {
    line("strokes: []");
  } else {
    line("strokes:");
    for (const StrokeSpec& st : s.strokes) {
      std::string pts;
      for (std::size_t i = 0; i < st.points.size(); ++i) {
        if (i) pts += ", ";
        pts += point(st.points[i]);
      }
      line("  - {kind: " + std::string(to_string(st.kind)) + ", mode: " +
           std::string(to_string(st.mode)) + ", width: " + std::to_string(st.width) +
           ", points: [" + pts + "]}");
    }
  }

  if (s.events.empty()) {
    line("events: []");
  } else {
    line("events:");
    for (const StimulusEvent& e : s.events) {
      line("  - {step: " + std::to_string(e.step) + ", center: " + point(e.center) +
           ", radius: " + std::to_string(e.radius) + "}");
    }
  }

  if (s.detectors.empty()) {
    line("detectors: []");
  } else {
    line("detectors:");
    for (const DetectorRegion& d : s.detectors) {
      line("  - {name: " + yaml_quoted(d.name) + ", rect: [" + std::to_string(d.rect.x) + ", " +
           std::to_string(d.rect.y) + ", " + std::to_string(d.rect.width) + ", " +
           std::to_string(d.rect.height) + "], threshold: " + format_double(d.threshold) + "}");
    }
  }
  line("detector_stride: " + std::to_string(s.detector_stride));
  line("total_steps: " + std::to_string(s.total_steps));
  std::string snaps;
  for (std::size_t i = 0; i < s.snapshot_steps.size(); ++i) {
    if (i) snaps += ", ";
    snaps += std::to_string(s.snapshot_steps[i]);
  }
  line("snapshot_steps: [" + snaps + "]");
  line("timelapse_stride: " +
       (s.timelapse_stride ? std::to_string(*s.timelapse_stride) : std::string("null")));
  return out.str();
}

std::string serialize_scenario(const Scenario& s) { return serialize_scenario_body(s, 0); }

std::string scenario_hash(const Scenario& s) { return sha256_hex(serialize_scenario(s)); }

namespace {

// Null nodes from an empty document carry no mark.
int line_of(const YAML::Node& n) { return std::max(1, n.Mark().line + 1); }

[[noreturn]] void fail_at(const YAML::Node& n, const std::string& msg) {
  throw ValidationError("line " + std::to_string(line_of(n)) + ": " + msg);
}

class Parser {
public:
  Scenario parse(const YAML::Node& root) {
    if (!root.IsMap()) fail_at(root, "scenario must be a mapping");
    remember("", root);
    check_keys(root, "", {"format_version", "name", "grid", "precision", "initial_state", "params",
                          "background", "strokes", "events", "detectors", "detector_stride",
                          "total_steps", "snapshot_steps", "timelapse_stride"});
    Scenario s;
    s.format_version = to_int(require(root, "format_version", ""), "format_version");
    if (s.format_version != kScenarioFormatVersion) {
      fail_at(root["format_version"], "unsupported format_version " +
                                          std::to_string(s.format_version) + " (supported: " +
                                          std::to_string(kScenarioFormatVersion) + ")");
    }
    if (auto n = optional(root, "name")) s.name = to_string(*n, "name");

    const YAML::Node grid = require(root, "grid", "");
    if (!grid.IsMap()) fail_at(grid, "grid must be a mapping");
    check_keys(grid, "grid", {"width", "height"});
    s.width = to_int(require(grid, "width", "grid"), "grid.width");
    s.height = to_int(require(grid, "height", "grid"), "grid.height");

    if (auto n = optional(root, "precision")) {
      const int bits = to_int(*n, "precision");
      if (bits != 32 && bits != 64) fail_at(*n, "precision must be 32 or 64");
      s.precision = bits == 32 ? Precision::f32 : Precision::f64;
    }
    if (auto n = optional(root, "initial_state")) {
      s.initial_state = wrap(*n, [&] { return parse_initial_state(to_string(*n, "initial_state")); });
    }

    const YAML::Node params = require(root, "params", "");
    if (!params.IsMap()) fail_at(params, "params must be a mapping");
    check_keys(params, "params", {kParamNames.begin(), kParamNames.end()});
    for (auto name : kParamNames) {
      const std::string key(name);
      s.params.*(*param_member(name)) = to_double(require(params, key, "params"), "params." + key);
    }

    if (auto n = optional(root, "background")) {
      s.background = wrap(*n, [&] { return parse_background(to_string(*n, "background")); });
    }
    if (auto n = optional(root, "strokes")) s.strokes = parse_strokes(*n);
    if (auto n = optional(root, "events")) s.events = parse_events(*n);
    if (auto n = optional(root, "detectors")) s.detectors = parse_detectors(*n);
    if (auto n = optional(root, "detector_stride")) {
      s.detector_stride = to_int64(*n, "detector_stride");
    }
    s.total_steps = to_int64(require(root, "total_steps", ""), "total_steps");
    if (auto n = optional(root, "snapshot_steps")) {
      const YAML::Node list = sequence(*n, "snapshot_steps");
      for (std::size_t i = 0; i < list.size(); ++i) {
        remember(at("snapshot_steps", i), list[i]);
        s.snapshot_steps.push_back(to_int64(list[i], at("snapshot_steps", i)));
      }
    }
    if (auto n = optional(root, "timelapse_stride")) {
      if (!n->IsNull()) s.timelapse_stride = to_int64(*n, "timelapse_stride");
    }

    try {
      s.validate();
    } catch (const ScenarioError& e) {
      throw ValidationError("line " + std::to_string(line_for(e.path())) + ": " + e.what());
    }
    return s;
  }

private:
  void remember(const std::string& path, const YAML::Node& n) { lines_[path] = line_of(n); }

  int line_for(std::string path) const {
    while (true) {
      if (auto it = lines_.find(path); it != lines_.end()) return it->second;
      const auto cut = path.find_last_of(".[");
      if (cut == std::string::npos) return lines_.at("");
      path.resize(cut);
    }
  }

  static std::string join(const std::string& base, const std::string& key) {
    return base.empty() ? key : base + "." + key;
  }

  void check_keys(const YAML::Node& map, const std::string& path, const std::set<std::string>& allowed) {
    std::set<std::string> seen;
    for (const auto& kv : map) {
      const std::string key = kv.first.Scalar();
      if (!allowed.count(key)) {
        fail_at(kv.first, "unknown field '" + join(path, key) + "'");
      }
      if (!seen.insert(key).second) fail_at(kv.first, "duplicate field '" + join(path, key) + "'");
      remember(join(path, key), kv.second);
    }
  }

  YAML::Node require(const YAML::Node& map, const std::string& key, const std::string& path) {
    const YAML::Node n = map[key];
    if (!n) fail_at(map, "missing field '" + join(path, key) + "'");
    return n;
  }

  static std::optional<YAML::Node> optional(const YAML::Node& map, const std::string& key) {
    const YAML::Node n = map[key];
    if (!n) return std::nullopt;
    return n;
  }

  template <typename F>
  static std::invoke_result_t<F> wrap(const YAML::Node& n, F&& f) {
    try {
      return f();
    } catch (const ValidationError& e) {
      fail_at(n, e.what());
    }
  }

  template <typename T>
  static T scalar(const YAML::Node& n, const std::string& path, const char* what) {
    if (!n.IsScalar()) fail_at(n, "'" + path + "' must be " + what);
    try {
      return n.as<T>();
    } catch (const YAML::Exception&) {
      fail_at(n, "'" + path + "' must be " + what + " (got '" + n.Scalar() + "')");
    }
  }

  static int to_int(const YAML::Node& n, const std::string& path) {
    return scalar<int>(n, path, "an integer");
  }
  static std::int64_t to_int64(const YAML::Node& n, const std::string& path) {
    return scalar<long long>(n, path, "an integer");
  }
  static double to_double(const YAML::Node& n, const std::string& path) {
    return scalar<double>(n, path, "a number");
  }
  static std::string to_string(const YAML::Node& n, const std::string& path) {
    return scalar<std::string>(n, path, "a string");
  }

  static YAML::Node sequence(const YAML::Node& n, const std::string& path) {
    if (!n.IsSequence()) fail_at(n, "'" + path + "' must be a list");
    return n;
  }

  Pixel to_pixel(const YAML::Node& n, const std::string& path) {
    if (!n.IsSequence() || n.size() != 2) fail_at(n, "'" + path + "' must be [x, y]");
    return {to_int(n[0], path + ".x"), to_int(n[1], path + ".y")};
  }

  std::vector<StrokeSpec> parse_strokes(const YAML::Node& n) {
    std::vector<StrokeSpec> out;
    const YAML::Node list = sequence(n, "strokes");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const YAML::Node item = list[i];
      const std::string path = at("strokes", i);
      remember(path, item);
      if (!item.IsMap()) fail_at(item, "'" + path + "' must be a mapping");
      check_keys(item, path, {"kind", "mode", "width", "points"});
      StrokeSpec st;
      const YAML::Node kind = require(item, "kind", path);
      st.kind = wrap(kind, [&] { return parse_stroke_kind(to_string(kind, path + ".kind")); });
      const YAML::Node mode = require(item, "mode", path);
      st.mode = wrap(mode, [&] { return parse_stroke_mode(to_string(mode, path + ".mode")); });
      st.width = to_int(require(item, "width", path), path + ".width");
      const YAML::Node pts = sequence(require(item, "points", path), path + ".points");
      for (std::size_t j = 0; j < pts.size(); ++j) {
        remember(at(path + ".points", j), pts[j]);
        st.points.push_back(to_pixel(pts[j], at(path + ".points", j)));
      }
      out.push_back(std::move(st));
    }
    return out;
  }

  std::vector<StimulusEvent> parse_events(const YAML::Node& n) {
    std::vector<StimulusEvent> out;
    const YAML::Node list = sequence(n, "events");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const YAML::Node item = list[i];
      const std::string path = at("events", i);
      remember(path, item);
      if (!item.IsMap()) fail_at(item, "'" + path + "' must be a mapping");
      check_keys(item, path, {"step", "center", "radius"});
      StimulusEvent e;
      e.step = to_int64(require(item, "step", path), path + ".step");
      e.center = to_pixel(require(item, "center", path), path + ".center");
      e.radius = to_int(require(item, "radius", path), path + ".radius");
      out.push_back(e);
    }
    return out;
  }

  std::vector<DetectorRegion> parse_detectors(const YAML::Node& n) {
    std::vector<DetectorRegion> out;
    const YAML::Node list = sequence(n, "detectors");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const YAML::Node item = list[i];
      const std::string path = at("detectors", i);
      remember(path, item);
      if (!item.IsMap()) fail_at(item, "'" + path + "' must be a mapping");
      check_keys(item, path, {"name", "rect", "threshold"});
      DetectorRegion d;
      d.name = to_string(require(item, "name", path), path + ".name");
      const YAML::Node rect = require(item, "rect", path);
      if (!rect.IsSequence() || rect.size() != 4) {
        fail_at(rect, "'" + path + ".rect' must be [x, y, width, height]");
      }
      d.rect = {to_int(rect[0], path + ".rect"), to_int(rect[1], path + ".rect"),
                to_int(rect[2], path + ".rect"), to_int(rect[3], path + ".rect")};
      if (auto t = optional(item, "threshold")) d.threshold = to_double(*t, path + ".threshold");
      out.push_back(std::move(d));
    }
    return out;
  }

  std::map<std::string, int> lines_;
};

}  // namespace

Scenario scenario_from_node(const YAML::Node& node) { return Parser{}.parse(node); }

Scenario parse_scenario(std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw ValidationError("line " + std::to_string(e.mark.line + 1) + ": syntax error: " + e.msg);
  }
  if (!root) throw ValidationError("line 1: empty scenario");
  return scenario_from_node(root);
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_scenario(buf.str());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void save_scenario(const Scenario& scenario, const std::filesystem::path& path) {
  scenario.validate();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << serialize_scenario(scenario);
  if (!out) throw IoError("failed writing " + path.string());
}

Scenario with_total_steps(const Scenario& scenario, std::int64_t steps) {
  if (steps < 0) throw ValidationError("steps must be >= 0");
  Scenario out = scenario;
  out.total_steps = steps;
  std::erase_if(out.events, [&](const StimulusEvent& e) { return e.step >= steps; });
  std::erase_if(out.snapshot_steps, [&](std::int64_t s) { return s > steps; });
  return out;
}

Scenario scenario_from_blueprint(const CircuitBlueprint& bp, const std::set<std::string>& pattern,
                                 const OregonatorParams& params) {
  bp.validate();
  Scenario s;
  s.name = bp.name;
  for (const std::string& site : pattern) s.name += "-" + site;
  s.width = bp.width;
  s.height = bp.height;
  s.params = params;
  s.background = bp.background;
  s.strokes = bp.strokes;
  for (const std::string& name : pattern) {
    const InputSite& site = bp.site(name);
    s.events.push_back({0, site.centre, site.radius});
  }
  s.detectors = bp.detectors;
  s.total_steps = bp.recommended_steps;
  s.snapshot_steps = {bp.recommended_steps};
  s.timelapse_stride = 100;
  s.validate();
  return s;
}

}  // namespace rdc
