#pragma once

#include "rdc/scenario.hpp"
#include "rdc/waves.hpp"

#include <string>
#include <vector>

namespace rdc {

/// Single stimulus at the centre; detectors `distance` pixels N/E/S/W of it.
struct TargetDemo {
  Pixel centre{200, 150};
  int radius = 6;
  int distance = 100;
  // Front arrival at 100 px is near step 7400 (0.0127 px/step).
  std::int64_t steps = 10000;
};

/// Two staggered stimuli: the second lands in the first one's wake, just
/// inside the refractory boundary, so only its inward half survives and
/// the free ends curl.
struct SpiralDemo {
  Pixel first{200, 150};
  int radius = 6;
  // Frozen by `calibrate spiral`: the first front passed `offset` pixels out
  // about 2500 steps before `delay`, close to the 2460-step refractory period
  // measured by `calibrate wave`. Lags of 2000-2500 sustain re-entry; 3000
  // and above give a second target wave that dies out.
  std::int64_t delay = 6000;
  int offset = 50;
  std::int64_t steps = 30000;
};

Scenario target_demo(const TargetDemo& demo = {});
Scenario spiral_demo(const SpiralDemo& demo = {});

/// Built-in demo by name ("spiral", "target"); ValidationError otherwise.
Scenario demo_scenario(const std::string& name);

struct CatalogEntry {
  std::string file;  // name under scenarios/
  Scenario scenario;
};

/// Every scenario shipped in scenarios/, generated from the frozen
/// blueprints and demos.
std::vector<CatalogEntry> shipped_scenarios();

}  // namespace rdc
