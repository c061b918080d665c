#include "rdc/session.hpp"

#include "rdc/digest.hpp"
#include "rdc/errors.hpp"

#include <algorithm>

using nlohmann::json;

namespace rdc {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

/// Simulation plus the session-level controls; shared by live and replay.
class SessionCore {
public:
  SessionCore(const Scenario& initial, int threads)
      : scenario_(initial), sim_(initial, threads), threads_(threads) {}

  Simulation& sim() { return sim_; }
  bool playing = false;
  std::int64_t render_stride = 100;

  /// Scenario events due at the current step, then integration of `n` steps
  /// with events applied at their boundaries. Returns steps actually taken
  /// through `taken` even when integration throws.
  void advance(std::int64_t n, std::int64_t& taken) {
    const std::int64_t start = sim_.step();
    const std::int64_t target = start + n;
    try {
      apply_due_events();
      while (sim_.step() < target) {
        std::int64_t next = target;
        if (next_event_ < scenario_.events.size()) {
          next = std::min(next, scenario_.events[next_event_].step);
        }
        sim_.advance_to(next);
        if (sim_.step() < target) apply_due_events();
      }
    } catch (...) {
      taken = sim_.step() - start;
      throw;
    }
    taken = sim_.step() - start;
  }

  void apply_due_events() {
    // Events stamped before the current step were skipped by a reset or load.
    while (next_event_ < scenario_.events.size() &&
           scenario_.events[next_event_].step <= sim_.step()) {
      const StimulusEvent& e = scenario_.events[next_event_++];
      if (e.step == sim_.step()) sim_.stimulate(e.center, e.radius);
    }
  }

  /// Throws ValidationError for commands that cannot be applied.
  void apply(const SessionCommand& c, FrameSink* sink) {
    std::visit(overloaded{
                   [&](const cmd::LoadScenario& b) {
                     Scenario next = parse_scenario(b.text);
                     restart(next);
                   },
                   [&](const cmd::Play&) { playing = true; },
                   [&](const cmd::Pause&) { playing = false; },
                   [&](const cmd::SetRenderStride& b) {
                     if (b.stride < 1) throw ValidationError("render stride must be >= 1");
                     render_stride = b.stride;
                   },
                   [&](const cmd::Stroke& b) { sim_.apply_stroke(b.stroke); },
                   [&](const cmd::Stimulate& b) { sim_.stimulate(b.center, b.radius); },
                   [&](const cmd::SetParam& b) { sim_.set_param(b.name, b.value); },
                   [&](const cmd::RequestSnapshot&) {
                     send_image(sim_.snapshot(), ImageKind::snapshot, sink);
                   },
                   [&](const cmd::TimelapseStart& b) {
                     if (b.stride < 1) throw ValidationError("timelapse stride must be >= 1");
                     sim_.timelapse_start(b.stride);
                   },
                   [&](const cmd::TimelapseStopSave&) {
                     send_image(sim_.timelapse_image(), ImageKind::timelapse, sink);
                     sim_.timelapse_stop();
                   },
                   [&](const cmd::Reset&) { restart(scenario_); },
               },
               c.body);
  }

private:
  void restart(const Scenario& s) {
    Simulation fresh(s, threads_);
    scenario_ = s;
    sim_ = std::move(fresh);
    next_event_ = 0;
  }

  void send_image(const RGBImage& img, ImageKind kind, FrameSink* sink) {
    if (!sink) return;
    ImageMessage m;
    m.kind = kind;
    m.step = sim_.step();
    m.name = image_file_name(scenario_hash(scenario_), m.step, kind);
    m.png = encode_png(img);
    m.sha256 = sha256_hex(m.png);
    sink->send(std::move(m));
  }

  Scenario scenario_;
  Simulation sim_;
  int threads_;
  std::size_t next_event_ = 0;
};

}  // namespace

void CommandQueue::push(SessionCommand command) {
  {
    std::lock_guard lock(mutex_);
    if (closed_) return;
    pending_.push_back(std::move(command));
  }
  ready_.notify_all();
}

void CommandQueue::close() {
  {
    std::lock_guard lock(mutex_);
    closed_ = true;
  }
  ready_.notify_all();
}

std::vector<SessionCommand> CommandQueue::poll(std::int64_t, bool wait) {
  std::unique_lock lock(mutex_);
  if (wait) ready_.wait(lock, [&] { return closed_ || !pending_.empty(); });
  std::vector<SessionCommand> out(std::make_move_iterator(pending_.begin()),
                                  std::make_move_iterator(pending_.end()));
  pending_.clear();
  return out;
}

bool CommandQueue::finished(std::int64_t) const {
  std::lock_guard lock(mutex_);
  return closed_ && pending_.empty();
}

ScriptedCommands::ScriptedCommands(std::vector<SessionLogEntry> script, std::int64_t end_step)
    : script_(std::move(script)), end_step_(end_step) {
  if (!std::is_sorted(script_.begin(), script_.end(), [](const auto& a, const auto& b) {
        return a.applied_at_step < b.applied_at_step;
      })) {
    throw ValidationError("script must be sorted by step");
  }
}

std::vector<SessionCommand> ScriptedCommands::poll(std::int64_t session_step, bool wait) {
  std::vector<SessionCommand> out;
  while (next_ < script_.size() && script_[next_].applied_at_step <= session_step) {
    out.push_back(script_[next_++].command);
  }
  if (out.empty() && wait && next_ < script_.size()) out.push_back(script_[next_++].command);
  return out;
}

bool ScriptedCommands::finished(std::int64_t session_step) const {
  return next_ >= script_.size() && session_step >= end_step_;
}

SessionLog session_loop(const Scenario& initial, CommandSource& source, FrameSink& sink,
                        const SessionOptions& options) {
  if (options.render_stride < 1) throw ValidationError("render stride must be >= 1");
  SessionCore core(initial, options.threads);
  core.playing = options.start_playing;
  core.render_stride = options.render_stride;
  SessionLog log;
  std::int64_t session_step = 0;

  const auto emit_frame = [&] {
    sink.send(make_frame(core.sim().snapshot(), core.sim().step(), core.render_stride,
                         options.downscale));
  };
  emit_frame();

  while (!source.finished(session_step)) {
    const std::vector<SessionCommand> commands = source.poll(session_step, !core.playing);
    // Paused and nothing more will arrive: time cannot move again.
    if (!core.playing && commands.empty()) break;
    bool changed = false;
    for (const SessionCommand& c : commands) {
      try {
        core.apply(c, &sink);
      } catch (const ValidationError& e) {
        sink.send(ErrorMessage{c.seq, e.what(), false});
        continue;
      }
      log.entries.push_back({session_step, c});
      sink.send(AckMessage{c.seq, session_step});
      changed = true;
    }
    core.apply_due_events();

    if (core.playing) {
      std::int64_t taken = 0;
      try {
        core.advance(core.render_stride, taken);
      } catch (const NumericalError& e) {
        session_step += taken;
        sink.send(ErrorMessage{std::nullopt, std::string("simulation diverged: ") + e.what(), true});
        emit_frame();
        break;
      }
      session_step += taken;
      emit_frame();
    } else if (changed) {
      emit_frame();
    }
  }
  core.sim().observe();
  log.final_step = session_step;
  log.final_checksum = core.sim().checksum();
  return log;
}

Simulation replay(const SessionLog& log, const Scenario& initial, int threads) {
  SessionCore core(initial, threads);
  std::int64_t session_step = 0;
  std::int64_t taken = 0;
  for (const SessionLogEntry& e : log.entries) {
    if (e.applied_at_step < session_step) throw ValidationError("replay: log steps decrease");
    if (e.applied_at_step > session_step) {
      core.advance(e.applied_at_step - session_step, taken);
      session_step += taken;
    }
    core.apply(e.command, nullptr);
  }
  if (log.final_step < session_step) throw ValidationError("replay: final step precedes the log");
  core.advance(log.final_step - session_step, taken);
  core.sim().observe();
  return std::move(core.sim());
}

json session_log_to_json(const SessionLog& log) {
  json entries = json::array();
  for (const SessionLogEntry& e : log.entries) {
    entries.push_back({{"applied_at_step", e.applied_at_step}, {"command", command_to_json(e.command)}});
  }
  return {{"entries", entries}, {"final_step", log.final_step}, {"final_checksum", log.final_checksum}};
}

SessionLog session_log_from_json(const json& j) {
  SessionLog log;
  try {
    for (const json& e : j.at("entries")) {
      log.entries.push_back({e.at("applied_at_step").get<std::int64_t>(),
                             command_from_json(e.at("command"))});
    }
    log.final_step = j.at("final_step").get<std::int64_t>();
    log.final_checksum = j.at("final_checksum").get<std::string>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("session log: ") + e.what());
  }
  return log;
}

Scenario log_to_scenario(const SessionLog& log, const Scenario& initial) {
  Scenario s = initial;
  s.total_steps = log.final_step;
  std::vector<StimulusEvent> added;
  for (const SessionLogEntry& e : log.entries) {
    const auto not_expressible = [&](const std::string& why) {
      throw ValidationError("session log: '" + command_type(e.command) + "' at step " +
                            std::to_string(e.applied_at_step) + " " + why);
    };
    std::visit(overloaded{
                   [&](const cmd::Stimulate& b) {
                     if (e.applied_at_step >= log.final_step) {
                       not_expressible("lies at the final step");
                     }
                     added.push_back({e.applied_at_step, b.center, b.radius});
                   },
                   [&](const cmd::Stroke& b) {
                     if (e.applied_at_step != 0) not_expressible("is not at step 0");
                     s.strokes.push_back(b.stroke);
                   },
                   [&](const cmd::SetParam& b) {
                     if (e.applied_at_step != 0) not_expressible("is not at step 0");
                     s.params = with_param(s.params, b.name, b.value);
                   },
                   [&](const cmd::LoadScenario&) { not_expressible("has no scenario form"); },
                   [&](const cmd::Reset&) { not_expressible("has no scenario form"); },
                   [](const auto&) {},
               },
               e.command.body);
  }
  // Scenario events first at equal steps: stimuli commute, so order only
  // matters for canonical form.
  s.events.insert(s.events.end(), added.begin(), added.end());
  std::stable_sort(s.events.begin(), s.events.end(),
                   [](const StimulusEvent& a, const StimulusEvent& b) { return a.step < b.step; });
  std::erase_if(s.events, [&](const StimulusEvent& ev) { return ev.step >= s.total_steps; });
  std::erase_if(s.snapshot_steps, [&](std::int64_t st) { return st > s.total_steps; });
  s.validate();
  return s;
}

}  // namespace rdc
