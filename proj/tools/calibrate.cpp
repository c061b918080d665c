// Geometry calibration sweeps for the verification circuits.
//
// The circuit constants in circuits.hpp were chosen with this tool: each
// sweep runs the truth table for a range of geometries and prints which
// ones behave as a gate. Re-run after changing the kernel or defaults.

#include "rdc/catalog.hpp"
#include "rdc/circuits.hpp"
#include "rdc/simulation.hpp"
#include "rdc/waves.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

namespace {

using rdc::DetectorOutcomes;

std::string fired_at(const DetectorOutcomes& o, const std::string& name) {
  const auto& d = o.at(name);
  return d.fired ? std::to_string(*d.first_fire_step) : "-";
}

void and_row(const rdc::AndGateGeometry& g, std::int64_t steps) {
  const auto bp = rdc::and_gate_blueprint(g);
  rdc::TruthTableOptions<float> opt;
  opt.steps = steps;
  const auto a = rdc::run_truth_table(bp, {"A"}, {}, opt);
  const auto b = rdc::run_truth_table(bp, {"B"}, {}, opt);
  const auto ab = rdc::run_truth_table(bp, {"A", "B"}, {}, opt);
  const bool ok = !a.at("out").fired && !b.at("out").fired && ab.at("out").fired;
  std::printf("channel=%2d gap=%d output=%2d  A:%6s B:%6s AB:%6s  %s\n", g.channel_width, g.gap,
              g.output_width, fired_at(a, "out").c_str(), fired_at(b, "out").c_str(),
              fired_at(ab, "out").c_str(), ok ? "AND" : "-");
}

void diode_row(const rdc::DiodeGeometry& g, std::int64_t steps) {
  const auto bp = rdc::diode_blueprint(g);
  rdc::TruthTableOptions<float> opt;
  opt.steps = steps;
  const auto fwd = rdc::run_truth_table(bp, {"anode"}, {}, opt);
  const auto rev = rdc::run_truth_table(bp, {"cathode"}, {}, opt);
  const bool ok = fwd.at("cathode").fired && !rev.at("anode").fired;
  std::printf("half_width=%2d gap=%d tip=%5.1f  forward:%6s reverse:%6s  %s\n",
              g.channel_half_width, g.gap, g.tip_angle_degrees,
              fired_at(fwd, "cathode").c_str(), fired_at(rev, "anode").c_str(),
              ok ? "DIODE" : "-");
}

// Smallest restimulation delay after the front passes that launches a second wave.
std::int64_t refractory_steps(const rdc::OregonatorParams& p) {
  std::int64_t lo = 0;
  std::int64_t hi = 20000;
  while (hi - lo > 50) {
    const std::int64_t mid = (lo + hi) / 2;
    (rdc::second_wave_propagates(p, mid) ? hi : lo) = mid;
  }
  return hi;
}

// Max u after the first ring has left the grid: > 0 means re-entry survived.
void spiral_row(const rdc::SpiralDemo& d) {
  rdc::Simulation sim(rdc::spiral_demo(d));
  const auto& s = sim.scenario();
  for (const auto& e : s.events) {
    sim.advance_to(e.step);
    sim.stimulate(e.center, e.radius);
  }
  sim.advance_to(s.total_steps);
  const double u_max = sim.extrema().u_max;
  std::printf("delay=%5lld offset=%3d  u_max(end)=%.3f  %s\n", static_cast<long long>(d.delay), d.offset,
              u_max, u_max > 0.5 ? "SUSTAINED" : "-");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sweep circuit geometries against their truth tables"};
  app.require_subcommand(1);
  std::int64_t steps = 0;
  bool sweep = false;

  auto* and_cmd = app.add_subcommand("and", "AND gate (compact 200x200 grid when sweeping)");
  and_cmd->add_option("--steps", steps, "steps per run (0 = recommended)");
  and_cmd->add_flag("--sweep", sweep, "sweep channel/gap/output widths");

  auto* diode_cmd = app.add_subcommand("diode", "diode");
  diode_cmd->add_option("--steps", steps, "steps per run (0 = recommended)");
  diode_cmd->add_flag("--sweep", sweep, "sweep half-width/gap/tip angle");

  auto* wave_cmd = app.add_subcommand("wave", "plane-wave speed and refractory period");
  auto* spiral_cmd = app.add_subcommand("spiral", "spiral demo stagger");
  spiral_cmd->add_flag("--sweep", sweep, "sweep delay and offset");

  CLI11_PARSE(app, argc, argv);
  const auto t0 = std::chrono::steady_clock::now();

  if (*and_cmd) {
    if (!sweep) {
      and_row({}, steps);
    } else {
      for (int gap : {1, 2, 3}) {
        for (int channel : {6, 8, 10, 12}) {
          for (int output : {8, 12, 16}) {
            rdc::AndGateGeometry g;
            g.channel_width = channel;
            g.gap = gap;
            g.output_width = output;
            g.arm_length = 60;
            g.output_length = 60;
            g.grid_width = 200;
            g.grid_height = 200;
            and_row(g, steps > 0 ? steps : 16000);
          }
        }
      }
    }
  } else if (*diode_cmd) {
    if (!sweep) {
      diode_row({}, steps);
    } else {
      for (int gap : {1, 2}) {
        for (int half : {6, 10, 15}) {
          for (double tip : {30.0, 60.0, 90.0, 120.0}) {
            rdc::DiodeGeometry g;
            g.channel_half_width = half;
            g.gap = gap;
            g.tip_angle_degrees = tip;
            g.grid_width = 240;
            g.grid_height = 2 * half + 21;
            g.channel_start = 5;
            g.channel_end = 234;
            diode_row(g, steps > 0 ? steps : 20000);
          }
        }
      }
    }
  }
  if (*wave_cmd) {
    const rdc::OregonatorParams p;
    const auto trace = rdc::trace_plane_wave(p, {});
    std::printf("speed 5000-15000: %.6f px/step\n", rdc::front_speed(trace, 5000, 15000));
    std::printf("speed 15000-25000: %.6f px/step\n", rdc::front_speed(trace, 15000, 25000));
    std::printf("refractory: %lld steps\n", static_cast<long long>(refractory_steps(p)));
  }
  if (*spiral_cmd) {
    if (!sweep) {
      spiral_row({});
    } else {
      // Offsets put the second stimulus 2000-4000 steps behind the first front.
      const double speed = 0.0127;
      for (std::int64_t delay : {6000, 9000}) {
        for (std::int64_t lag : {2000, 2500, 3000, 3500, 4000}) {
          rdc::SpiralDemo d;
          d.delay = delay;
          d.offset = static_cast<int>(std::lround(d.radius + speed * (delay - lag)));
          spiral_row(d);
        }
      }
    }
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("elapsed %.1f s\n", secs);
}
