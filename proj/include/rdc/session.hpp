#pragma once

#include "rdc/protocol.hpp"
#include "rdc/scenario.hpp"
#include "rdc/simulation.hpp"

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <mutex>
#include <string>
#include <vector>

namespace rdc {

/**
 * Applied commands stamped with the session step at which they took effect.
 *
 * The session step counts every integration step since the session began;
 * unlike the simulation step it is not rewound by reset or load_scenario,
 * so stamps never decrease.
 */
struct SessionLogEntry {
  std::int64_t applied_at_step = 0;
  SessionCommand command;
  bool operator==(const SessionLogEntry&) const = default;
};

struct SessionLog {
  std::vector<SessionLogEntry> entries;
  std::int64_t final_step = 0;
  std::string final_checksum;  // field checksum when the session ended
  bool operator==(const SessionLog&) const = default;
};

nlohmann::json session_log_to_json(const SessionLog& log);
SessionLog session_log_from_json(const nlohmann::json& j);

/// The scenario equivalent to replaying `log` on `initial`. Only stimulate
/// commands, plus strokes and set_param stamped at step 0, have a scenario
/// form; other physics-changing commands throw ValidationError.
Scenario log_to_scenario(const SessionLog& log, const Scenario& initial);

class CommandSource {
public:
  virtual ~CommandSource() = default;
  /// Commands available at `session_step`. With `wait`, blocks until at
  /// least one arrives or the source is finished.
  virtual std::vector<SessionCommand> poll(std::int64_t session_step, bool wait) = 0;
  virtual bool finished(std::int64_t session_step) const = 0;
};

class FrameSink {
public:
  virtual ~FrameSink() = default;
  virtual void send(Message message) = 0;
};

/// Thread-safe queue fed by a transport reader.
class CommandQueue : public CommandSource {
public:
  void push(SessionCommand command);
  void close();
  std::vector<SessionCommand> poll(std::int64_t session_step, bool wait) override;
  bool finished(std::int64_t session_step) const override;

private:
  mutable std::mutex mutex_;
  std::condition_variable ready_;
  std::deque<SessionCommand> pending_;
  bool closed_ = false;
};

/// Commands released at fixed session steps; ends once `end_step` is reached.
/// While paused, the next command is released early so a script never stalls.
class ScriptedCommands : public CommandSource {
public:
  ScriptedCommands(std::vector<SessionLogEntry> script, std::int64_t end_step);
  std::vector<SessionCommand> poll(std::int64_t session_step, bool wait) override;
  bool finished(std::int64_t session_step) const override;

private:
  std::vector<SessionLogEntry> script_;
  std::size_t next_ = 0;
  std::int64_t end_step_;
};

/// Keeps every message, for tests and headless use.
class RecordingSink : public FrameSink {
public:
  void send(Message message) override { messages.push_back(std::move(message)); }
  std::vector<Message> messages;
};

struct SessionOptions {
  int threads = 0;
  int downscale = 1;
  std::int64_t render_stride = 100;
  bool start_playing = false;
};

/**
 * Live session: each round drains pending commands (stamping each with the
 * current session step), applies them, integrates render_stride steps when
 * playing and emits a frame. Rejected commands get an error message and do
 * not enter the log. Divergence ends the session with a fatal error, and
 * a paused session ends once its source has nothing left to give.
 */
SessionLog session_loop(const Scenario& initial, CommandSource& source, FrameSink& sink,
                        const SessionOptions& options = {});

/// Re-executes a log headlessly; the result's checksum equals the live one.
Simulation replay(const SessionLog& log, const Scenario& initial, int threads = 0);

}  // namespace rdc
