#include "rdc/waves.hpp"

#include "rdc/errors.hpp"

#include <algorithm>
#include <string>

namespace rdc {

template <typename T>
std::optional<double> front_position(const BasicSimState<T>& state, int y, double threshold) {
  if (y < 0 || y >= state.height()) {
    throw ValidationError("front_position: row " + std::to_string(y) + " outside the grid");
  }
  for (int x = state.width() - 1; x >= 0; --x) {
    const double here = static_cast<double>(state.u(x, y));
    if (here < threshold) continue;
    if (x == state.width() - 1) return static_cast<double>(x);
    const double next = static_cast<double>(state.u(x + 1, y));
    return x + (here - threshold) / (here - next);
  }
  return std::nullopt;
}

template std::optional<double> front_position(const SimState32&, int, double);
template std::optional<double> front_position(const SimState64&, int, double);

namespace {

SimState64 channel(const OregonatorParams& params, int width, int height) {
  return quiescent_state(Field64(width, height, params.phi_active), params);
}

void excite_columns(SimState64& s, int x0, int x1) {
  for (int y = 0; y < s.height(); ++y) {
    for (int x = std::max(x0, 0); x < std::min(x1, s.width()); ++x) s.u(x, y) = 1.0;
  }
}

}  // namespace

std::vector<FrontSample> trace_plane_wave(const OregonatorParams& params,
                                          const PlaneWaveSetup& setup) {
  params.validate();
  if (setup.stride < 1 || setup.steps < 0) throw ValidationError("trace_plane_wave: bad stride or steps");
  Integrator<double> integ(channel(params, setup.width, setup.height), params,
                           KernelKind::parallel, setup.threads);
  excite_columns(integ.state(), 0, setup.stimulus_columns);
  const int row = setup.height / 2;
  std::vector<FrontSample> trace;
  while (integ.state().step < setup.steps) {
    integ.advance(std::min(setup.stride, setup.steps - integ.state().step));
    const auto x = front_position(integ.state(), row);
    if (!x) break;
    trace.push_back({integ.state().step, *x});
    if (*x >= setup.width - 2) break;
  }
  return trace;
}

double front_speed(const std::vector<FrontSample>& trace, std::int64_t from, std::int64_t to) {
  const auto at = [&](std::int64_t step) {
    const auto it = std::find_if(trace.begin(), trace.end(),
                                 [&](const FrontSample& s) { return s.step == step; });
    if (it == trace.end()) throw ValidationError("front_speed: step " + std::to_string(step) + " not traced");
    return it->x;
  };
  if (to <= from) throw ValidationError("front_speed: empty interval");
  return (at(to) - at(from)) / static_cast<double>(to - from);
}

bool second_wave_propagates(const OregonatorParams& params, std::int64_t delay, int at_x,
                            int distance, int threads) {
  const int width = at_x + distance + 20;
  const int row = 4;
  const int probe = at_x + distance;
  Integrator<double> integ(channel(params, width, 8), params, KernelKind::parallel, threads);
  excite_columns(integ.state(), 0, 4);

  int rising_edges = 0;
  bool above = false;
  const auto watch = [&] {
    const bool now = integ.state().u(probe, row) >= kFrontThreshold;
    if (now && !above) ++rising_edges;
    above = now;
  };
  constexpr std::int64_t kLimit = 400000;
  while (integ.state().u(at_x, row) < kFrontThreshold) {
    if (integ.state().step > kLimit) throw NumericalError("first wave never reached the probe", at_x, row);
    integ.advance(1);
    watch();
  }
  for (std::int64_t i = 0; i < delay; ++i) {
    integ.advance(1);
    watch();
  }
  excite_columns(integ.state(), at_x - 2, at_x + 2);
  const std::int64_t deadline = integ.state().step + kLimit;
  while (integ.state().step < deadline && rising_edges < 2) {
    integ.advance(1);
    watch();
    // Quiet channel to the right: nothing more can arrive.
    if (rising_edges == 1 && !above) {
      bool any = false;
      for (int x = at_x - 2; x < width && !any; ++x) any = integ.state().u(x, row) >= kFrontThreshold;
      if (!any) break;
    }
  }
  return rising_edges >= 2;
}

std::optional<std::int64_t> barrier_crossing_step(const OregonatorParams& params, int width,
                                                  Incidence incidence, std::int64_t budget,
                                                  int threads) {
  params.validate();
  if (width < 0) throw ValidationError("barrier width must be >= 0");
  constexpr int kSize = 200;
  SubstrateMask mask(kSize, kSize);
  const bool perpendicular = incidence == Incidence::perpendicular;
  if (width > 0) {
    const StrokeSpec line = perpendicular
                                ? StrokeSpec{StrokeKind::line, {{0, kSize}, {kSize, 0}}, width, StrokeMode::add}
                                : StrokeSpec{StrokeKind::line, {{-10, -10}, {kSize + 10, kSize + 10}}, width,
                                             StrokeMode::add};
    mask.apply_stroke(line);
  }
  SimState64 s = quiescent_state(phi_field<double>(mask, params), params);
  for (int y = 0; y < kSize; ++y) {
    for (int x = 0; x < kSize; ++x) {
      const bool excite = perpendicular ? x + y < 8 : (x + y < 12 && y < x - width - 1);
      if (excite) s.u(x, y) = 1.0;
    }
  }
  const Pixel probe = perpendicular ? Pixel{130, 130} : Pixel{60, 150};
  Integrator<double> integ(std::move(s), params, KernelKind::parallel, threads);
  while (integ.state().step < budget) {
    integ.advance(50);
    const SimState64& st = integ.state();
    if (st.u(probe.x, probe.y) >= kFrontThreshold) return st.step;
    if (st.step % 1000 == 0 &&
        std::none_of(st.u.values().begin(), st.u.values().end(), [](double u) { return u >= kFrontThreshold; })) {
      return std::nullopt;  // every wave has died
    }
  }
  return std::nullopt;
}

}  // namespace rdc
