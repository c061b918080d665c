#include "rdc/circuits.hpp"

#include "rdc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace rdc {

void DetectorRegion::validate(int grid_width, int grid_height) const {
  if (rect.empty()) throw ValidationError("detector '" + name + "': empty region");
  if (!rect.inside(grid_width, grid_height)) {
    throw ValidationError("detector '" + name + "': region outside the grid");
  }
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw ValidationError("detector '" + name + "': threshold must lie in (0, 1)");
  }
}

void CircuitBlueprint::validate() const {
  if (input_sites.empty()) throw ValidationError("blueprint '" + name + "': no input sites");
  if (detectors.empty()) throw ValidationError("blueprint '" + name + "': no detectors");
  const auto in_grid = [&](Pixel p) { return p.x >= 0 && p.y >= 0 && p.x < width && p.y < height; };
  for (const StrokeSpec& s : strokes) {
    s.validate();
    for (const Pixel& p : s.points) {
      if (!in_grid(p)) throw ValidationError("blueprint '" + name + "': stroke point outside grid");
    }
  }
  for (const InputSite& site : input_sites) {
    if (!in_grid(site.centre)) {
      throw ValidationError("blueprint '" + name + "': input site '" + site.name + "' outside grid");
    }
  }
  for (const DetectorRegion& d : detectors) d.validate(width, height);
}

SubstrateMask CircuitBlueprint::build_mask() const {
  SubstrateMask mask(width, height, background);
  for (const StrokeSpec& s : strokes) mask.apply_stroke(s);
  return mask;
}

const InputSite& CircuitBlueprint::site(const std::string& wanted) const {
  for (const InputSite& s : input_sites) {
    if (s.name == wanted) return s;
  }
  throw ValidationError("blueprint '" + name + "': no input site named '" + wanted + "'");
}

std::vector<StrokeSpec> row_strokes(int y0, int y1,
                                    const std::function<std::pair<int, int>(int)>& span,
                                    StrokeMode mode) {
  std::vector<StrokeSpec> out;
  for (int y = y0; y <= y1; ++y) {
    const auto [x0, x1] = span(y);
    if (x1 < x0) continue;
    out.push_back({StrokeKind::line, {{x0, y}, {x1, y}}, 1, mode});
  }
  return out;
}

CircuitBlueprint and_gate_blueprint(const AndGateGeometry& g) {
  if (g.channel_width < 1 || g.gap < 1 || g.output_width < 1 || g.arm_length < 1 ||
      g.output_length < 1) {
    throw ValidationError("and gate: geometry values must be positive");
  }
  const Pixel junction{g.grid_width / 2, g.grid_height / 2};
  const Pixel end_a{junction.x - g.arm_length, junction.y + g.arm_length};
  const Pixel end_b{junction.x + g.arm_length, junction.y - g.arm_length};
  const Pixel out_end{junction.x + g.output_length, junction.y + g.output_length};
  const int margin = std::max(g.channel_width, g.output_width) / 2 + 1;
  const auto fits = [&](Pixel p) {
    return p.x >= margin && p.y >= margin && p.x < g.grid_width - margin &&
           p.y < g.grid_height - margin;
  };
  if (!fits(end_a) || !fits(end_b) || !fits(out_end)) {
    throw ValidationError("and gate: geometry does not fit a " + std::to_string(g.grid_width) +
                          "x" + std::to_string(g.grid_height) + " grid");
  }

  // Centre of the separating line, offset along the output axis.
  const int offset = static_cast<int>(
      std::lround((g.channel_width / 2.0 + g.gap / 2.0) / std::numbers::sqrt2));
  const Pixel sep{junction.x + offset, junction.y + offset};
  const int reach = g.output_width;

  CircuitBlueprint bp;
  bp.name = "and_gate";
  bp.width = g.grid_width;
  bp.height = g.grid_height;
  bp.background = BackgroundMode::filled;
  bp.strokes = {
      {StrokeKind::line, {end_a, end_b}, g.channel_width, StrokeMode::erase},
      {StrokeKind::line, {junction, out_end}, g.output_width, StrokeMode::erase},
      {StrokeKind::line,
       {{sep.x - reach, sep.y + reach}, {sep.x + reach, sep.y - reach}},
       g.gap,
       StrokeMode::add},
  };
  const int radius = std::max(g.channel_width / 2 - 1, 0);
  bp.input_sites = {
      {"A", {end_a.x + 4, end_a.y - 4}, radius},
      {"B", {end_b.x - 4, end_b.y + 4}, radius},
  };
  bp.detectors = {{"out", {out_end.x - 8, out_end.y - 8, 5, 5}, 0.1}};
  // The AB output fires near step 20200 with default parameters.
  bp.recommended_steps = 26000;
  bp.validate();
  return bp;
}

CircuitBlueprint diode_blueprint(const DiodeGeometry& g) {
  const int h = g.channel_half_width;
  if (h < 1 || g.gap < 1 || !(g.tip_angle_degrees > 0.0 && g.tip_angle_degrees < 180.0)) {
    throw ValidationError("diode: half-width and gap must be positive, tip angle in (0, 180)");
  }
  const int yc = g.grid_height / 2;
  const int face = g.grid_width / 2;  // first gap column
  const double slope = 1.0 / std::tan(g.tip_angle_degrees / 2.0 * std::numbers::pi / 180.0);
  if (yc - h < 2 || yc + h > g.grid_height - 3 || g.channel_start < 2 ||
      g.channel_end > g.grid_width - 3 || g.channel_start + 2 * h + 2 > face ||
      face + g.gap + static_cast<int>(std::ceil(h * slope)) + 2 * h + 2 > g.channel_end) {
    throw ValidationError("diode: geometry does not fit a " + std::to_string(g.grid_width) + "x" +
                          std::to_string(g.grid_height) + " grid");
  }

  CircuitBlueprint bp;
  bp.name = "diode";
  bp.width = g.grid_width;
  bp.height = g.grid_height;
  bp.background = BackgroundMode::filled;
  // Anode: rectangle ending in a flat face.
  bp.strokes = row_strokes(
      yc - h, yc + h, [&](int) { return std::pair{g.channel_start, face - 1}; }, StrokeMode::erase);
  // Cathode: wedge whose tip touches the gap, widening into the channel.
  auto cathode = row_strokes(
      yc - h, yc + h,
      [&](int y) {
        const int k = std::abs(y - yc);
        const int start = face + g.gap + static_cast<int>(std::ceil(k * slope - 1e-9));
        return std::pair{start, g.channel_end};
      },
      StrokeMode::erase);
  bp.strokes.insert(bp.strokes.end(), cathode.begin(), cathode.end());

  const int radius = std::max(h - 1, 0);
  bp.input_sites = {
      {"anode", {g.channel_start + h, yc}, radius},
      {"cathode", {g.channel_end - h, yc}, radius},
  };
  bp.detectors = {
      {"anode", {g.channel_start + 5, yc - 2, 5, 5}, 0.1},
      {"cathode", {g.channel_end - 9, yc - 2, 5, 5}, 0.1},
  };
  bp.recommended_steps = 27000;
  bp.validate();
  return bp;
}

template <typename T>
bool detect_wave(const BasicSimState<T>& state, const DetectorRegion& region) {
  region.validate(state.width(), state.height());
  T peak = state.u(region.rect.x, region.rect.y);
  for (int y = region.rect.y; y < region.rect.y + region.rect.height; ++y) {
    for (int x = region.rect.x; x < region.rect.x + region.rect.width; ++x) {
      peak = std::max(peak, state.u(x, y));
    }
  }
  return static_cast<double>(peak) >= region.threshold;
}

DetectorLatch::DetectorLatch(std::vector<DetectorRegion> detectors, std::int64_t stride)
    : detectors_(std::move(detectors)), stride_(stride) {
  if (stride_ < 1) throw ValidationError("detector stride must be >= 1");
  for (const DetectorRegion& d : detectors_) {
    if (!outcomes_.emplace(d.name, DetectorOutcome{}).second) {
      throw ValidationError("duplicate detector name '" + d.name + "'");
    }
  }
}

template <typename T>
void DetectorLatch::sample(const BasicSimState<T>& state) {
  for (const DetectorRegion& d : detectors_) {
    DetectorOutcome& out = outcomes_.at(d.name);
    if (!out.fired && detect_wave(state, d)) {
      out.fired = true;
      out.first_fire_step = state.step;
    }
  }
}

template <typename T>
DetectorOutcomes run_truth_table(const CircuitBlueprint& blueprint,
                                 const std::set<std::string>& pattern,
                                 const OregonatorParams& params,
                                 const TruthTableOptions<T>& options) {
  blueprint.validate();
  const std::int64_t steps = options.steps > 0 ? options.steps : blueprint.recommended_steps;
  const SubstrateMask mask = blueprint.build_mask();
  BasicSimState<T> state = quiescent_state(phi_field<T>(mask, params), params);
  for (const std::string& name : pattern) {
    const InputSite& s = blueprint.site(name);
    apply_stimulus(state, s.centre, s.radius);
  }

  DetectorLatch latch(blueprint.detectors, options.sample_stride);
  const auto sample = [&](const BasicSimState<T>& s) {
    latch.sample(s);
    if (options.observer) options.observer(s);
  };
  sample(state);
  Integrator<T> integrator(std::move(state), params, KernelKind::parallel, options.threads);
  integrator.advance(steps, sample, options.sample_stride);
  return latch.outcomes();
}

template bool detect_wave(const SimState32&, const DetectorRegion&);
template bool detect_wave(const SimState64&, const DetectorRegion&);
template void DetectorLatch::sample(const SimState32&);
template void DetectorLatch::sample(const SimState64&);
template DetectorOutcomes run_truth_table(const CircuitBlueprint&, const std::set<std::string>&,
                                          const OregonatorParams&,
                                          const TruthTableOptions<float>&);
template DetectorOutcomes run_truth_table(const CircuitBlueprint&, const std::set<std::string>&,
                                          const OregonatorParams&,
                                          const TruthTableOptions<double>&);

}  // namespace rdc
