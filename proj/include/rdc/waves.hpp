#pragma once

#include "rdc/model.hpp"
#include "rdc/substrate.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace rdc {

/// Threshold for "the wave is here".
inline constexpr double kFrontThreshold = 0.1;

/// Rightmost crossing of `threshold` by u along row `y`, interpolated
/// linearly between pixels. nullopt when no pixel of the row reaches it.
template <typename T>
std::optional<double> front_position(const BasicSimState<T>& state, int y,
                                     double threshold = kFrontThreshold);

struct FrontSample {
  std::int64_t step = 0;
  double x = 0.0;  // pixels
};

struct PlaneWaveSetup {
  int width = 400;
  int height = 12;
  int stimulus_columns = 4;  // u = 1 on x < stimulus_columns at step 0
  std::int64_t steps = 30000;
  std::int64_t stride = 100;
  int threads = 0;
};

/// Plane wave launched from the left edge of an active quiescent channel,
/// front traced along the middle row every `stride` steps (64-bit).
/// Tracing stops once the front reaches the right edge.
std::vector<FrontSample> trace_plane_wave(const OregonatorParams& params,
                                          const PlaneWaveSetup& setup = {});

/// Mean front speed in pixels per step between two traced steps.
double front_speed(const std::vector<FrontSample>& trace, std::int64_t from, std::int64_t to);

/// Restimulates the channel at `at_x` after the first front has passed it by
/// `delay` steps and reports whether a second wave travels `distance` pixels
/// away from the first one's wake.
bool second_wave_propagates(const OregonatorParams& params, std::int64_t delay,
                            int at_x = 60, int distance = 60, int threads = 0);

enum class Incidence { perpendicular, parallel };

/**
 * Barrier test on a 200x200 active grid, 64-bit. The barrier is a 45-degree
 * line stroke (axis-aligned lines of 3 px already block every wave on this
 * grid, so the presets are told apart on the diagonal):
 *
 *   perpendicular: plane front launched from the top-left corner, barrier
 *                  on x + y = 200, probe at (130, 130) behind it.
 *   parallel:      front launched on the x > y side, travelling along the
 *                  barrier on x = y; probe at (60, 150) on the other side.
 *
 * Returns the probe's first-fire step (sampled every 50), or nullopt when
 * nothing reaches it within `budget` steps. Width 0 is the no-barrier control.
 */
std::optional<std::int64_t> barrier_crossing_step(const OregonatorParams& params, int width,
                                                  Incidence incidence, std::int64_t budget = 30000,
                                                  int threads = 0);

}  // namespace rdc
