#pragma once

#include "rdc/model.hpp"
#include "rdc/substrate.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace rdc {

struct Rect {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;

  bool empty() const { return width <= 0 || height <= 0; }
  bool inside(int grid_width, int grid_height) const {
    return x >= 0 && y >= 0 && x + width <= grid_width && y + height <= grid_height;
  }
  bool operator==(const Rect&) const = default;
};

struct DetectorRegion {
  std::string name;
  Rect rect;
  double threshold = 0.1;

  void validate(int grid_width, int grid_height) const;
  bool operator==(const DetectorRegion&) const = default;
};

struct InputSite {
  std::string name;
  Pixel centre;
  int radius = 0;
  bool operator==(const InputSite&) const = default;
};

struct CircuitBlueprint {
  std::string name;
  int width = 400;
  int height = 300;
  BackgroundMode background = BackgroundMode::filled;
  std::vector<StrokeSpec> strokes;
  std::vector<InputSite> input_sites;
  std::vector<DetectorRegion> detectors;
  std::int64_t recommended_steps = 0;

  void validate() const;
  SubstrateMask build_mask() const;
  const InputSite& site(const std::string& name) const;

  bool operator==(const CircuitBlueprint&) const = default;
};

/// Coincidence detector laid out on the 45-degree diagonals: two input arms
/// meet head-on at a junction; a thin passive line separates the junction
/// from a perpendicular output channel. A lone wave runs parallel to the
/// line and dies; two colliding waves present a broad front and cross it.
struct AndGateGeometry {
  int channel_width = kChannelWidth;
  int gap = kGap;
  int output_width = kOutputWidth;
  int arm_length = 100;     // per axis, junction to arm end
  int output_length = 100;  // per axis, junction to output end
  int grid_width = 400;
  int grid_height = 300;

  // Frozen by tools/calibrate (working window: channel 6-10, gap 2, output 8-16).
  static constexpr int kChannelWidth = 8;
  static constexpr int kGap = 2;
  static constexpr int kOutputWidth = 12;
};

/// Straight channel broken by a passive gap: flat face on the anode side,
/// wedge tip pointing at the gap on the cathode side.
struct DiodeGeometry {
  int channel_half_width = kChannelHalfWidth;  // channel is 2h+1 rows
  int gap = kGap;
  double tip_angle_degrees = kTipAngle;  // full apex angle
  int channel_start = 60;
  int channel_end = 340;
  int grid_width = 400;
  int grid_height = 300;

  // Frozen by tools/calibrate (forward-only for half-width 6-15, apex 60-120).
  static constexpr int kChannelHalfWidth = 10;
  static constexpr int kGap = 1;
  static constexpr double kTipAngle = 90.0;
};

CircuitBlueprint and_gate_blueprint(const AndGateGeometry& geometry = {});
CircuitBlueprint diode_blueprint(const DiodeGeometry& geometry = {});

/// Width-1 row strokes covering an x-monotone region, one per row.
std::vector<StrokeSpec> row_strokes(int y0, int y1, const std::function<std::pair<int, int>(int)>& span,
                                    StrokeMode mode);

/// True iff max u over the region reaches its threshold.
template <typename T>
bool detect_wave(const BasicSimState<T>& state, const DetectorRegion& region);

struct DetectorOutcome {
  bool fired = false;
  std::optional<std::int64_t> first_fire_step;
  bool operator==(const DetectorOutcome&) const = default;
};

using DetectorOutcomes = std::map<std::string, DetectorOutcome>;

/// Latches detector hits sampled every `stride` steps.
class DetectorLatch {
public:
  DetectorLatch(std::vector<DetectorRegion> detectors, std::int64_t stride);

  template <typename T>
  void sample(const BasicSimState<T>& state);

  const DetectorOutcomes& outcomes() const { return outcomes_; }
  std::int64_t stride() const { return stride_; }

private:
  std::vector<DetectorRegion> detectors_;
  std::int64_t stride_;
  DetectorOutcomes outcomes_;
};

inline constexpr std::int64_t kDetectorStride = 50;

template <typename T>
struct TruthTableOptions {
  std::int64_t steps = 0;  // <= 0: blueprint's recommended_steps
  std::int64_t sample_stride = kDetectorStride;
  int threads = 0;
  /// Sees every sampled state, including step 0 after stimulation.
  std::function<void(const BasicSimState<T>&)> observer;
};

/// Quiescent medium over the blueprint's substrate, `pattern` sites
/// stimulated at step 0, run with latched detection.
template <typename T = float>
DetectorOutcomes run_truth_table(const CircuitBlueprint& blueprint,
                                 const std::set<std::string>& pattern,
                                 const OregonatorParams& params = {},
                                 const TruthTableOptions<T>& options = {});

}  // namespace rdc
