#pragma once

#include "rdc/circuits.hpp"
#include "rdc/model.hpp"
#include "rdc/render.hpp"
#include "rdc/scenario.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <variant>

namespace rdc {

/**
 * A scenario brought to life: state, substrate, detectors and an optional
 * timelapse, advanced between step boundaries.
 *
 * Observation (detector sampling, timelapse recording) happens at absolute
 * steps: multiples of the detector stride and the timelapse stride. A
 * boundary is observed once, just before integration leaves it, so every
 * edit made while sitting on a boundary is visible to its observation.
 */
template <typename T>
class BasicSimulation {
public:
  explicit BasicSimulation(const Scenario& scenario, int threads = 0,
                           KernelKind kernel = KernelKind::parallel);

  std::int64_t step() const { return integrator_.state().step; }
  const BasicSimState<T>& state() const { return integrator_.state(); }
  const SubstrateMask& mask() const { return mask_; }
  const OregonatorParams& params() const { return integrator_.params(); }
  const DetectorOutcomes& outcomes() const { return latch_.outcomes(); }

  void stimulate(Pixel center, int radius);
  /// Edits the mask and the phi of the touched pixels.
  void apply_stroke(const StrokeSpec& stroke);
  void set_param(std::string_view name, double value);

  /// Integrates up to `target`, observing every boundary passed on the way.
  void advance_to(std::int64_t target);
  /// Observes the current boundary if it is due and not yet observed.
  void observe();

  void timelapse_start(std::int64_t stride);
  void timelapse_stop();
  const std::optional<TimelapseAccumulator>& timelapse() const { return timelapse_; }

  RGBImage snapshot() const { return render_snapshot(state(), mask_); }
  std::string checksum() const { return field_checksum(state()); }

private:
  SubstrateMask mask_;
  Integrator<T> integrator_;
  DetectorLatch latch_;
  std::optional<TimelapseAccumulator> timelapse_;
  std::int64_t observed_step_ = -1;
};

/// Precision chosen at run time from the scenario.
class Simulation {
public:
  explicit Simulation(const Scenario& scenario, int threads = 0,
                      KernelKind kernel = KernelKind::parallel);

  const Scenario& scenario() const { return scenario_; }
  std::int64_t step() const;
  const SubstrateMask& mask() const;
  const OregonatorParams& params() const;
  const DetectorOutcomes& outcomes() const;

  void stimulate(Pixel center, int radius);
  void apply_stroke(const StrokeSpec& stroke);
  void set_param(std::string_view name, double value);
  void advance_to(std::int64_t target);
  void advance(std::int64_t n) { advance_to(step() + n); }
  void observe();
  void timelapse_start(std::int64_t stride);
  void timelapse_stop();
  bool timelapse_active() const;
  RGBImage timelapse_image() const;
  RGBImage snapshot() const;
  std::string checksum() const;

  /// Range of u and v, for boundedness checks.
  struct Extrema {
    double u_min, u_max, v_min, v_max;
  };
  Extrema extrema() const;

private:
  Scenario scenario_;
  std::variant<BasicSimulation<float>, BasicSimulation<double>> impl_;
};

std::variant<BasicSimulation<float>, BasicSimulation<double>> make_simulation(
    const Scenario& scenario, int threads, KernelKind kernel);

}  // namespace rdc
