#include "rdc/catalog.hpp"

#include "rdc/circuits.hpp"

namespace rdc {

namespace {

DetectorRegion probe(const std::string& name, Pixel at) {
  return {name, {at.x - 2, at.y - 2, 5, 5}, kFrontThreshold};
}

Scenario demo_base(const std::string& name, std::int64_t steps) {
  Scenario s;
  s.name = name;
  s.background = BackgroundMode::empty;
  s.total_steps = steps;
  s.snapshot_steps = {steps};
  s.timelapse_stride = 100;
  return s;
}

}  // namespace

Scenario target_demo(const TargetDemo& d) {
  Scenario s = demo_base("demo-target", d.steps);
  s.events = {{0, d.centre, d.radius}};
  const Pixel c = d.centre;
  s.detectors = {probe("north", {c.x, c.y - d.distance}), probe("east", {c.x + d.distance, c.y}),
                 probe("south", {c.x, c.y + d.distance}), probe("west", {c.x - d.distance, c.y})};
  s.validate();
  return s;
}

Scenario spiral_demo(const SpiralDemo& d) {
  Scenario s = demo_base("demo-spiral", d.steps);
  s.events = {{0, d.first, d.radius}, {d.delay, {d.first.x + d.offset, d.first.y}, d.radius}};
  s.validate();
  return s;
}

Scenario demo_scenario(const std::string& name) {
  if (name == "target") return target_demo();
  if (name == "spiral") return spiral_demo();
  throw ValidationError("unknown demo '" + name + "' (expected spiral or target)");
}

std::vector<CatalogEntry> shipped_scenarios() {
  const CircuitBlueprint and_gate = and_gate_blueprint();
  const CircuitBlueprint diode = diode_blueprint();
  std::vector<CatalogEntry> out;
  const auto add = [&](std::string file, Scenario s) {
    s.name = file;
    out.push_back({file + std::string(kScenarioExtension), std::move(s)});
  };
  add("and-gate-00", scenario_from_blueprint(and_gate, {}));
  add("and-gate-01", scenario_from_blueprint(and_gate, {"B"}));
  add("and-gate-10", scenario_from_blueprint(and_gate, {"A"}));
  add("and-gate-11", scenario_from_blueprint(and_gate, {"A", "B"}));
  add("diode-forward", scenario_from_blueprint(diode, {"anode"}));
  add("diode-reverse", scenario_from_blueprint(diode, {"cathode"}));
  add("demo-target", target_demo());
  add("demo-spiral", spiral_demo());
  return out;
}

}  // namespace rdc
