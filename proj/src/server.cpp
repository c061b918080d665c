#include "rdc/server.hpp"

#include "rdc/errors.hpp"
#include "rdc/runner.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <condition_variable>
#include <cstring>
#include <algorithm>
#include <deque>
#include <list>
#include <mutex>
#include <thread>

namespace rdc {

namespace {

void send_all(int fd, const std::vector<std::uint8_t>& bytes) {
  std::size_t done = 0;
  while (done < bytes.size()) {
    const ssize_t n = ::send(fd, bytes.data() + done, bytes.size() - done, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw IoError(std::string("send: ") + std::strerror(errno));
    }
    done += static_cast<std::size_t>(n);
  }
}

/// Encoded messages waiting for the writer thread; frames may be dropped.
class Outbox : public FrameSink {
public:
  explicit Outbox(std::size_t max_frames) : max_frames_(max_frames) {}

  void send(Message message) override {
    const bool is_frame = std::holds_alternative<FrameMessage>(message);
    std::vector<std::uint8_t> bytes = encode_message(message);
    {
      std::lock_guard lock(mutex_);
      if (closed_) return;
      if (is_frame && frames_ >= max_frames_) {
        const auto oldest = std::find_if(items_.begin(), items_.end(), [](const Item& i) { return i.frame; });
        if (oldest != items_.end()) {
          items_.erase(oldest);
          --frames_;
        }
      }
      items_.push_back({std::move(bytes), is_frame});
      if (is_frame) ++frames_;
    }
    ready_.notify_one();
  }

  /// Blocks; nullopt once closed and drained.
  std::optional<std::vector<std::uint8_t>> pop() {
    std::unique_lock lock(mutex_);
    ready_.wait(lock, [&] { return closed_ || !items_.empty(); });
    if (items_.empty()) return std::nullopt;
    Item item = std::move(items_.front());
    items_.pop_front();
    if (item.frame) --frames_;
    return std::move(item.bytes);
  }

  void close() {
    {
      std::lock_guard lock(mutex_);
      closed_ = true;
    }
    ready_.notify_all();
  }

  void discard() {
    {
      std::lock_guard lock(mutex_);
      items_.clear();
      frames_ = 0;
      closed_ = true;
    }
    ready_.notify_all();
  }

private:
  struct Item {
    std::vector<std::uint8_t> bytes;
    bool frame;
  };
  std::mutex mutex_;
  std::condition_variable ready_;
  std::deque<Item> items_;
  std::size_t frames_ = 0;
  std::size_t max_frames_;
  bool closed_ = false;
};

void run_connection(int fd, const ServerOptions& options) {
  Outbox outbox(options.max_pending_frames);
  CommandQueue commands;
  // The session starts only after the client's hello checks out.
  enum class Handshake { pending, ok, failed };
  std::mutex hs_mutex;
  std::condition_variable hs_ready;
  Handshake handshake = Handshake::pending;
  const auto settle = [&](Handshake h) {
    {
      std::lock_guard lock(hs_mutex);
      if (handshake != Handshake::pending) return;
      handshake = h;
    }
    hs_ready.notify_all();
  };

  std::thread writer([&] {
    try {
      while (auto bytes = outbox.pop()) send_all(fd, *bytes);
    } catch (const IoError&) {
      outbox.discard();
      commands.close();
      ::shutdown(fd, SHUT_RDWR);
    }
  });

  std::thread reader([&] {
    MessageDecoder decoder;
    bool greeted = false;
    std::vector<std::uint8_t> buf(1 << 16);
    try {
      while (true) {
        const ssize_t n = ::recv(fd, buf.data(), buf.size(), 0);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) break;
        decoder.feed(std::span(buf.data(), static_cast<std::size_t>(n)));
        while (true) {
          std::optional<Message> m;
          try {
            m = decoder.next();
          } catch (const ValidationError& e) {
            outbox.send(ErrorMessage{std::nullopt, e.what(), false});
            continue;
          }
          if (!m) break;
          if (!greeted) {
            const auto* hello = std::get_if<HelloMessage>(&*m);
            if (!hello) throw ProtocolError("expected hello");
            if (hello->version != kProtocolVersion) {
              throw ProtocolError("unsupported protocol version " + std::to_string(hello->version));
            }
            greeted = true;
            settle(Handshake::ok);
          } else if (auto* c = std::get_if<SessionCommand>(&*m)) {
            commands.push(std::move(*c));
          } else {
            throw ProtocolError("clients may only send commands after the handshake");
          }
        }
      }
    } catch (const ProtocolError& e) {
      outbox.send(ErrorMessage{std::nullopt, std::string("protocol: ") + e.what(), true});
    }
    settle(Handshake::failed);
    commands.close();
  });

  outbox.send(HelloMessage{kProtocolVersion, options.initial.width, options.initial.height,
                           std::string(kEngineVersion)});
  {
    std::unique_lock lock(hs_mutex);
    hs_ready.wait(lock, [&] { return handshake != Handshake::pending; });
  }
  if (handshake == Handshake::ok) {
    try {
      const SessionLog log = session_loop(options.initial, commands, outbox, options.session);
      if (options.on_session_end) options.on_session_end(log);
    } catch (const std::exception& e) {
      outbox.send(ErrorMessage{std::nullopt, e.what(), true});
    }
  }
  outbox.close();
  writer.join();
  ::shutdown(fd, SHUT_RDWR);
  reader.join();
  ::close(fd);
}

int open_listener(const std::string& host, int port, int& bound_port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  const std::string service = std::to_string(port);
  if (const int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &res); rc != 0) {
    throw IoError("resolve " + host + ": " + ::gai_strerror(rc));
  }
  int fd = -1;
  for (addrinfo* ai = res; ai; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    const int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(fd, ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(fd, 8) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) throw IoError("cannot listen on " + host + ":" + service + ": " + std::strerror(errno));
  sockaddr_storage addr{};
  socklen_t len = sizeof addr;
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  bound_port = addr.ss_family == AF_INET6
                   ? ntohs(reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port)
                   : ntohs(reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
  return fd;
}

}  // namespace

void serve(const ServerOptions& options) {
  options.initial.validate();
  int port = 0;
  const int listener = open_listener(options.host, options.port, port);
  if (options.on_listening) options.on_listening(port);

  struct Live {
    std::thread thread;
    int fd;
    std::atomic<bool> done{false};
  };
  std::list<Live> live;
  int ended = 0;
  const auto reap = [&] {
    for (auto it = live.begin(); it != live.end();) {
      if (it->done) {
        it->thread.join();
        it = live.erase(it);
        ++ended;
      } else {
        ++it;
      }
    }
  };

  while (!(options.stop && *options.stop)) {
    reap();
    if (options.max_sessions > 0 && ended >= options.max_sessions) break;
    pollfd p{listener, POLLIN, 0};
    const int ready = ::poll(&p, 1, 100);
    if (ready <= 0) continue;
    const int fd = ::accept(listener, nullptr, nullptr);
    if (fd < 0) continue;
    const int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    Live& conn = live.emplace_back();
    conn.fd = fd;
    conn.thread = std::thread([&options, &conn, fd] {
      run_connection(fd, options);
      conn.done = true;
    });
  }
  for (Live& conn : live) {
    if (!conn.done) ::shutdown(conn.fd, SHUT_RD);
  }
  for (Live& conn : live) conn.thread.join();
  ::close(listener);
}

SessionClient::SessionClient(const std::string& host, int port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string service = std::to_string(port);
  if (const int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &res); rc != 0) {
    throw IoError("resolve " + host + ": " + ::gai_strerror(rc));
  }
  for (addrinfo* ai = res; ai; ai = ai->ai_next) {
    fd_ = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd_ < 0) continue;
    if (::connect(fd_, ai->ai_addr, ai->ai_addrlen) == 0) break;
    ::close(fd_);
    fd_ = -1;
  }
  ::freeaddrinfo(res);
  if (fd_ < 0) throw IoError("cannot connect to " + host + ":" + service);

  auto first = receive(std::chrono::seconds(10));
  const auto* hello = first ? std::get_if<HelloMessage>(&*first) : nullptr;
  if (!hello) throw ProtocolError("server did not open with hello");
  hello_ = *hello;
  send(HelloMessage{kProtocolVersion, 0, 0, "client"});
}

SessionClient::~SessionClient() {
  if (fd_ >= 0) ::close(fd_);
}

void SessionClient::send(const Message& message) { send_all(fd_, encode_message(message)); }

std::optional<Message> SessionClient::receive(std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  std::vector<std::uint8_t> buf(1 << 16);
  while (true) {
    if (auto m = decoder_.next()) return m;
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) return std::nullopt;
    pollfd p{fd_, POLLIN, 0};
    if (::poll(&p, 1, static_cast<int>(left.count())) <= 0) continue;
    const ssize_t n = ::recv(fd_, buf.data(), buf.size(), 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) {
      if (decoder_.buffered() > 0) throw ProtocolError("stream ended inside a message");
      return std::nullopt;
    }
    decoder_.feed(std::span(buf.data(), static_cast<std::size_t>(n)));
  }
}

void SessionClient::finish() { ::shutdown(fd_, SHUT_WR); }

}  // namespace rdc
