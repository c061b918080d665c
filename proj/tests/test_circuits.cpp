#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rdc/circuits.hpp"
#include "rdc/model.hpp"
#include "support.hpp"

#include <algorithm>

using namespace rdc;

namespace {

SimState32 state_with_u(int w, int h, float background) {
  const OregonatorParams p;
  SimState32 s = quiescent_state(Field32(w, h, static_cast<float>(p.phi_active)), p);
  for (float& x : s.u.values()) x = background;
  return s;
}

}  // namespace

TEST_CASE("blueprints are well formed and pure") {
  for (const CircuitBlueprint& bp : {and_gate_blueprint(), diode_blueprint()}) {
    CAPTURE(bp.name);
    CHECK_NOTHROW(bp.validate());
    CHECK(bp.width == 400);
    CHECK(bp.height == 300);
    CHECK(bp.recommended_steps > 0);
    for (const InputSite& s : bp.input_sites) {
      CHECK(s.centre.x >= 0);
      CHECK(s.centre.x < bp.width);
      CHECK(s.centre.y >= 0);
      CHECK(s.centre.y < bp.height);
      // Sites sit on active medium.
      CHECK_FALSE(bp.build_mask().at(s.centre.x, s.centre.y));
    }
    for (const DetectorRegion& d : bp.detectors) CHECK(d.rect.inside(bp.width, bp.height));
  }
  CHECK(and_gate_blueprint() == and_gate_blueprint());
  CHECK(diode_blueprint() == diode_blueprint());
  CHECK(and_gate_blueprint().build_mask() == and_gate_blueprint().build_mask());
  CHECK_THROWS_AS(and_gate_blueprint().site("C"), ValidationError);
}

TEST_CASE("blueprint validation") {
  CircuitBlueprint bp = diode_blueprint();
  SUBCASE("detector outside the grid") {
    bp.detectors[0].rect.x = 398;
    CHECK_THROWS_AS(bp.validate(), ValidationError);
  }
  SUBCASE("no input sites") {
    bp.input_sites.clear();
    CHECK_THROWS_AS(bp.validate(), ValidationError);
  }
  SUBCASE("empty detector") {
    bp.detectors[0].rect.width = 0;
    CHECK_THROWS_AS(bp.validate(), ValidationError);
  }
}

TEST_CASE("AND gate is mirror symmetric in its inputs") {
  const CircuitBlueprint bp = and_gate_blueprint();
  const SubstrateMask m = bp.build_mask();
  const Pixel a = bp.site("A").centre;
  const Pixel b = bp.site("B").centre;
  // Reflection across the output diagonal: (x, y) -> (y + c, x - c).
  const int c = b.x - a.y;
  REQUIRE(a.x - c == b.y);
  for (int y = 0; y < bp.height; ++y) {
    for (int x = 0; x < bp.width; ++x) {
      const int rx = y + c, ry = x - c;
      if (rx < 0 || ry < 0 || rx >= bp.width || ry >= bp.height) continue;
      if (m.at(x, y) != m.at(rx, ry)) {
        FAIL("mask differs at " << x << "," << y);
      }
    }
  }
  CHECK(bp.site("A").radius == bp.site("B").radius);
  // The output detector lies on the mirror line.
  const Rect r = bp.detectors.at(0).rect;
  CHECK(r.y + r.height / 2 == r.x + r.width / 2 - c);
}

TEST_CASE("detect_wave") {
  const DetectorRegion region{"d", {10, 10, 5, 5}, 0.1};
  SimState32 s = state_with_u(30, 30, 0.0f);
  CHECK_FALSE(detect_wave(s, region));
  SUBCASE("one cell at threshold") {
    s.u(14, 14) = 0.1f;
    CHECK(detect_wave(s, region));
  }
  SUBCASE("one cell just below") {
    s.u(12, 12) = 0.0999f;
    CHECK_FALSE(detect_wave(s, region));
  }
  SUBCASE("excitation just outside the region") {
    s.u(15, 12) = 0.9f;
    s.u(9, 12) = 0.9f;
    s.u(12, 15) = 0.9f;
    s.u(12, 9) = 0.9f;
    CHECK_FALSE(detect_wave(s, region));
  }
}

TEST_CASE("latch records the first hit and never clears") {
  const DetectorRegion region{"d", {0, 0, 2, 2}, 0.5};
  DetectorLatch latch({region}, kDetectorStride);
  SimState32 s = state_with_u(4, 4, 0.0f);
  latch.sample(s);
  CHECK_FALSE(latch.outcomes().at("d").fired);
  CHECK_FALSE(latch.outcomes().at("d").first_fire_step.has_value());
  s.step = 150;
  s.u(1, 1) = 0.7f;
  latch.sample(s);
  s.step = 200;
  s.u(1, 1) = 0.0f;
  latch.sample(s);
  s.step = 250;
  s.u(0, 0) = 0.9f;
  latch.sample(s);
  CHECK(latch.outcomes().at("d") == DetectorOutcome{true, 150});
}

TEST_CASE("property: latch equals the first sampled hit") {
  testing::Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const DetectorRegion region{"d", {1, 1, 2, 2}, 0.5};
    DetectorLatch latch({region}, 1);
    SimState32 s = state_with_u(4, 4, 0.0f);
    std::optional<std::int64_t> expect;
    bool ever = false;
    for (int k = 0; k < 20; ++k) {
      s.step = k;
      const float peak = static_cast<float>(testing::uniform_real(rng, 0.0, 0.6));
      s.u(2, 2) = peak;
      latch.sample(s);
      if (!ever && peak >= 0.5f) {
        ever = true;
        expect = k;
      }
      CHECK(latch.outcomes().at("d").fired == ever);
    }
    CHECK(latch.outcomes().at("d").first_fire_step == expect);
  }
}

TEST_CASE("diode with no stimulus stays quiet") {
  TruthTableOptions<float> opt;
  opt.steps = 3000;
  const DetectorOutcomes out = run_truth_table<float>(diode_blueprint(), {}, {}, opt);
  CHECK_FALSE(out.at("anode").fired);
  CHECK_FALSE(out.at("cathode").fired);
}

TEST_CASE("unknown pattern site is rejected") {
  CHECK_THROWS_AS(run_truth_table<float>(and_gate_blueprint(), {"Z"}), ValidationError);
}

TEST_CASE("AND gate: both inputs reach the output") {
  const DetectorOutcomes out = run_truth_table<float>(and_gate_blueprint(), {"A", "B"});
  CHECK(out.at("out").fired);
  REQUIRE(out.at("out").first_fire_step.has_value());
  CHECK(*out.at("out").first_fire_step < and_gate_blueprint().recommended_steps);
}

TEST_CASE("AND gate: single input is stopped") {
  CHECK_FALSE(run_truth_table<float>(and_gate_blueprint(), {"A"}).at("out").fired);
}

TEST_CASE("diode: forward conducts, observed from the cathode detector") {
  bool anode_seen = false;
  TruthTableOptions<float> opt;
  const DetectorRegion anode = diode_blueprint().detectors.at(0);
  opt.observer = [&](const SimState32& s) { anode_seen = anode_seen || detect_wave(s, anode); };
  const DetectorOutcomes out = run_truth_table<float>(diode_blueprint(), {"anode"}, {}, opt);
  CHECK(anode_seen);
  CHECK(out.at("anode").fired);
  CHECK(out.at("cathode").fired);
}
