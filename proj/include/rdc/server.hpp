#pragma once

#include "rdc/protocol.hpp"
#include "rdc/scenario.hpp"
#include "rdc/session.hpp"

#include <atomic>
#include <chrono>
#include <functional>
#include <optional>
#include <string>

namespace rdc {

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 8765;  // 0 picks a free port, reported through on_listening
  Scenario initial;
  SessionOptions session;
  /// Frames waiting for a slow client beyond this are dropped, oldest first.
  std::size_t max_pending_frames = 4;
  std::function<void(int port)> on_listening;
  /// Called with each finished session's log, from that session's thread.
  std::function<void(const SessionLog&)> on_session_end;
  /// Polled between accepts; setting it closes live sessions and returns.
  const std::atomic<bool>* stop = nullptr;
  /// Return after this many sessions have ended (0: serve until stopped).
  int max_sessions = 0;
};

/**
 * TCP session host. One session per connection:
 *
 *   server -> hello (version, grid size, engine)
 *   client -> hello (version)
 *   client -> command*      server -> frame | ack | error | image
 *
 * The session ends when the client closes its side of the connection.
 */
void serve(const ServerOptions& options);

/// Blocking client: connects and completes the handshake.
class SessionClient {
public:
  SessionClient(const std::string& host, int port);
  ~SessionClient();
  SessionClient(const SessionClient&) = delete;
  SessionClient& operator=(const SessionClient&) = delete;

  const HelloMessage& server_hello() const { return hello_; }
  void send(const Message& message);
  /// Next message, or nullopt on timeout or end of stream.
  std::optional<Message> receive(std::chrono::milliseconds timeout);
  /// Half-close: the server ends the session after draining our commands.
  void finish();

private:
  int fd_ = -1;
  MessageDecoder decoder_;
  HelloMessage hello_;
};

}  // namespace rdc
