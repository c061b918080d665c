#pragma once

#include "rdc/circuits.hpp"
#include "rdc/errors.hpp"
#include "rdc/params.hpp"
#include "rdc/substrate.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace YAML {
class Node;
}

namespace rdc {

inline constexpr int kScenarioFormatVersion = 1;
inline constexpr std::string_view kScenarioExtension = ".rdc";

enum class InitialState {
  quiescent,  // homogeneous rest state at phi_active
  zero,       // u = v = 0
};

std::string_view to_string(InitialState s);
InitialState parse_initial_state(std::string_view text);

/// u := 1 on a disc, applied before integrating `step`.
struct StimulusEvent {
  std::int64_t step = 0;
  Pixel center;
  int radius = 0;
  bool operator==(const StimulusEvent&) const = default;
};

/// Invariant violation located by a field path such as "events[2].step".
class ScenarioError : public ValidationError {
public:
  ScenarioError(std::string path, const std::string& message)
      : ValidationError(path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

private:
  std::string path_;
};

/// One complete, hashable experiment.
struct Scenario {
  int format_version = kScenarioFormatVersion;
  std::string name;
  int width = 400;
  int height = 300;
  Precision precision = Precision::f32;
  InitialState initial_state = InitialState::quiescent;
  OregonatorParams params;
  BackgroundMode background = BackgroundMode::empty;
  std::vector<StrokeSpec> strokes;
  std::vector<StimulusEvent> events;
  std::vector<DetectorRegion> detectors;
  std::int64_t detector_stride = kDetectorStride;
  std::int64_t total_steps = 0;
  std::vector<std::int64_t> snapshot_steps;
  std::optional<std::int64_t> timelapse_stride;

  /// Throws ScenarioError with the path of the first violation.
  void validate() const;
  SubstrateMask build_mask() const;

  bool operator==(const Scenario&) const = default;
};

/// Strict parse: unknown fields rejected, every error prefixed "line N:".
Scenario parse_scenario(std::string_view text);
/// Same, for a node inside a larger document (line numbers refer to that document).
Scenario scenario_from_node(const YAML::Node& node);

/// Canonical text: fixed key order, shortest round-trip numbers, trailing newline.
std::string serialize_scenario(const Scenario& scenario);
/// Canonical body indented by `indent` spaces, for embedding under a key.
std::string serialize_scenario_body(const Scenario& scenario, int indent);

/// Hex SHA-256 of the canonical serialisation.
std::string scenario_hash(const Scenario& scenario);

Scenario load_scenario(const std::filesystem::path& path);
void save_scenario(const Scenario& scenario, const std::filesystem::path& path);

/// Copy truncated to `steps`: events at or past the new end dropped,
/// snapshot steps beyond it dropped.
Scenario with_total_steps(const Scenario& scenario, std::int64_t steps);

/// Truth-table run of a blueprint as a scenario: `pattern` sites stimulated
/// at step 0, quiescent start, final snapshot and a timelapse.
Scenario scenario_from_blueprint(const CircuitBlueprint& blueprint,
                                 const std::set<std::string>& pattern,
                                 const OregonatorParams& params = {});

/// Shortest decimal that parses back to the same double.
std::string format_double(double value);

}  // namespace rdc
