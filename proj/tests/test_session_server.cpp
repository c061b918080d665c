#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rdc/digest.hpp"
#include "rdc/runner.hpp"
#include "rdc/server.hpp"
#include "rdc/session.hpp"
#include "rdc/waves.hpp"
#include "support.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <future>
#include <thread>

using namespace rdc;
using namespace std::chrono_literals;

namespace {

constexpr Pixel kCentre{50, 50};

Scenario arena() {
  Scenario s;
  s.name = "arena";
  s.width = 100;
  s.height = 100;
  s.detectors = {{"north", {48, 18, 5, 5}, 0.1},
                 {"east", {78, 48, 5, 5}, 0.1},
                 {"south", {48, 78, 5, 5}, 0.1},
                 {"west", {18, 48, 5, 5}, 0.1}};
  return s;
}

template <typename T>
std::size_t count(const std::vector<Message>& messages) {
  return static_cast<std::size_t>(
      std::count_if(messages.begin(), messages.end(), [](const Message& m) { return std::holds_alternative<T>(m); }));
}

SessionLogEntry at(std::int64_t step, std::uint64_t seq, CommandBody body) { return {step, {seq, std::move(body)}}; }

}  // namespace

TEST_CASE("paused session with no commands never advances") {
  SUBCASE("closed queue") {
    CommandQueue q;
    q.close();
    RecordingSink sink;
    const SessionLog log = session_loop(arena(), q, sink);
    CHECK(log.final_step == 0);
    CHECK(log.entries.empty());
    REQUIRE(sink.messages.size() == 1);
    CHECK(std::get<FrameMessage>(sink.messages[0]).step == 0);
  }
  SUBCASE("exhausted script") {
    ScriptedCommands script({}, 5000);
    RecordingSink sink;
    CHECK(session_loop(arena(), script, sink).final_step == 0);
  }
  SUBCASE("commands that do not play") {
    ScriptedCommands script({at(0, 1, cmd::Stimulate{kCentre, 4}), at(0, 2, cmd::Pause{})}, 5000);
    RecordingSink sink;
    const SessionLog log = session_loop(arena(), script, sink);
    CHECK(log.final_step == 0);
    CHECK(log.entries.size() == 2);
    CHECK(count<AckMessage>(sink.messages) == 2);
  }
}

TEST_CASE("stimulate then play reaches detectors on all four sides") {
  ScriptedCommands script({at(0, 1, cmd::Stimulate{kCentre, 4}), at(0, 2, cmd::Play{})}, 4000);
  RecordingSink sink;
  const SessionLog log = session_loop(arena(), script, sink, {0, 1, 200, false});
  CHECK(log.final_step == 4000);
  const Simulation sim = replay(log, arena());
  CHECK(sim.checksum() == log.final_checksum);
  for (const auto& [name, outcome] : sim.outcomes()) {
    CAPTURE(name);
    CHECK(outcome.fired);
  }
  // One frame up front, one after the acks, one per stride.
  CHECK(count<FrameMessage>(sink.messages) == 1 + 4000 / 200);
  const auto& last = std::get<FrameMessage>(sink.messages.back());
  CHECK(last.step == 4000);
  CHECK(last.render_stride == 200);
}

TEST_CASE("render stride does not change the physics") {
  const std::vector<SessionLogEntry> script{at(0, 1, cmd::Stimulate{kCentre, 4}), at(0, 2, cmd::Play{})};
  ScriptedCommands a(script, 3000), b(script, 3000);
  RecordingSink sa, sb;
  const SessionLog la = session_loop(arena(), a, sa, {0, 1, 100, false});
  const SessionLog lb = session_loop(arena(), b, sb, {0, 1, 1000, false});
  CHECK(la.final_step == lb.final_step);
  CHECK(la.final_checksum == lb.final_checksum);
  CHECK(count<FrameMessage>(sa.messages) > count<FrameMessage>(sb.messages));
}

TEST_CASE("replay of an empty log is plain integration") {
  Scenario s = arena();
  s.events = {{0, kCentre, 3}};
  s.total_steps = 1500;
  SessionLog log;
  log.final_step = 1500;
  testing::TempDir dir("empty-log");
  const RunRecord direct = execute(s, dir.path());
  CHECK(replay(log, s).checksum() == direct.field_checksum);
  CHECK(replay(log, s).outcomes() == direct.detector_outcomes);
}

TEST_CASE("a stimulate command becomes a scenario event") {
  ScriptedCommands script({at(0, 1, cmd::Play{}), at(500, 2, cmd::Stimulate{{30, 60}, 3})}, 2000);
  RecordingSink sink;
  const SessionLog log = session_loop(arena(), script, sink, {0, 1, 100, false});
  REQUIRE(log.entries.size() == 2);
  CHECK(log.entries[1].applied_at_step == 500);
  const Scenario s = log_to_scenario(log, arena());
  CHECK(s.total_steps == 2000);
  REQUIRE(s.events.size() == 1);
  CHECK(s.events[0] == StimulusEvent{500, {30, 60}, 3});
  testing::TempDir dir("log-scenario");
  CHECK(execute(s, dir.path()).field_checksum == log.final_checksum);
}

TEST_CASE("commands without a scenario form") {
  SessionLog log;
  log.final_step = 100;
  log.entries = {at(50, 1, cmd::Reset{})};
  CHECK_THROWS_AS(log_to_scenario(log, arena()), ValidationError);
  log.entries = {at(50, 1, cmd::SetParam{"phi_active", 0.06})};
  CHECK_THROWS_AS(log_to_scenario(log, arena()), ValidationError);
  log.entries = {at(0, 1, cmd::SetParam{"phi_active", 0.06})};
  CHECK(log_to_scenario(log, arena()).params.phi_active == 0.06);
}

TEST_CASE("rejected commands get an error and stay out of the log") {
  ScriptedCommands script({at(0, 1, cmd::SetParam{"phi_active", -1.0}), at(0, 2, cmd::SetParam{"nope", 1.0}),
                           at(0, 3, cmd::Stimulate{kCentre, 2}), at(0, 4, cmd::LoadScenario{"bogus: 1\n"})},
                          0);
  RecordingSink sink;
  const SessionLog log = session_loop(arena(), script, sink);
  REQUIRE(log.entries.size() == 1);
  CHECK(log.entries[0].command.seq == 3);
  std::vector<std::uint64_t> errors;
  for (const Message& m : sink.messages) {
    if (const auto* e = std::get_if<ErrorMessage>(&m)) {
      CHECK_FALSE(e->fatal);
      errors.push_back(e->seq.value());
    }
  }
  CHECK(errors == std::vector<std::uint64_t>{1, 2, 4});
}

TEST_CASE("property: a recorded session replays to the same fields") {
  testing::Rng rng(31);
  for (int trial = 0; trial < 6; ++trial) {
    std::vector<SessionLogEntry> script;
    std::int64_t step = 0;
    script.push_back(at(0, 0, cmd::Play{}));
    for (std::uint64_t seq = 1; seq <= 10; ++seq) {
      step += 100 * testing::uniform_int(rng, 0, 4);
      const Pixel p{testing::uniform_int(rng, 5, 94), testing::uniform_int(rng, 5, 94)};
      CommandBody body;
      switch (testing::uniform_int(rng, 0, 7)) {
        case 0: body = cmd::Stimulate{p, testing::uniform_int(rng, 1, 5)}; break;
        case 1: body = cmd::Stroke{{StrokeKind::line, {p, {p.x + 5, p.y - 3}}, 2, StrokeMode::add}}; break;
        case 2: body = cmd::SetParam{"phi_active", testing::uniform_real(rng, 0.05, 0.06)}; break;
        case 3: body = cmd::SetRenderStride{100 * testing::uniform_int(rng, 1, 3)}; break;
        case 4: body = cmd::RequestSnapshot{}; break;
        case 5: body = cmd::TimelapseStart{50}; break;
        case 6: body = cmd::Reset{}; break;
        default: body = cmd::Stimulate{p, 3}; break;
      }
      script.push_back(at(step, seq, body));
    }
    ScriptedCommands source(script, step + 600);
    RecordingSink sink;
    const SessionLog log = session_loop(arena(), source, sink);
    CHECK(log.entries.size() == script.size());
    for (std::size_t i = 1; i < log.entries.size(); ++i) {
      CHECK(log.entries[i].applied_at_step >= log.entries[i - 1].applied_at_step);
    }
    CHECK(replay(log, arena()).checksum() == log.final_checksum);
    const SessionLog back = session_log_from_json(nlohmann::json::parse(session_log_to_json(log).dump()));
    CHECK(back == log);
  }
}

TEST_CASE("snapshot and timelapse images") {
  ScriptedCommands script({at(0, 1, cmd::Stimulate{kCentre, 4}), at(0, 2, cmd::TimelapseStart{10}),
                           at(0, 3, cmd::Play{}), at(300, 4, cmd::RequestSnapshot{}),
                           at(300, 5, cmd::TimelapseStopSave{})},
                          400);
  RecordingSink sink;
  session_loop(arena(), script, sink, {0, 1, 100, false});
  std::vector<ImageMessage> images;
  for (const Message& m : sink.messages) {
    if (const auto* i = std::get_if<ImageMessage>(&m)) images.push_back(*i);
  }
  REQUIRE(images.size() == 2);
  CHECK(images[0].kind == ImageKind::snapshot);
  CHECK(images[1].kind == ImageKind::timelapse);
  for (const ImageMessage& i : images) {
    CHECK(i.step == 300);
    CHECK(decode_png(i.png).width() == 100);
    CHECK(i.name == image_file_name(scenario_hash(arena()), 300, i.kind));
  }
}

TEST_CASE("TCP session matches its replay") {
  ServerOptions opt;
  opt.port = 0;
  opt.initial = arena();
  opt.session = {1, 2, 100, false};
  opt.max_sessions = 1;
  std::promise<int> port;
  std::promise<SessionLog> ended;
  opt.on_listening = [&](int p) { port.set_value(p); };
  opt.on_session_end = [&](const SessionLog& log) { ended.set_value(log); };
  std::thread server([&] { serve(opt); });

  {
    SessionClient client("127.0.0.1", port.get_future().get());
    CHECK(client.server_hello().width == 100);
    CHECK(client.server_hello().height == 100);
    CHECK(client.server_hello().version == kProtocolVersion);
    client.send(SessionCommand{1, cmd::Stimulate{kCentre, 4}});
    client.send(SessionCommand{2, cmd::SetParam{"q", -3.0}});
    client.send(SessionCommand{3, cmd::Play{}});
    std::vector<Message> got;
    std::int64_t last_step = 0;
    while (last_step < 1000) {
      auto m = client.receive(10s);
      REQUIRE(m.has_value());
      if (const auto* f = std::get_if<FrameMessage>(&*m)) {
        last_step = static_cast<std::int64_t>(f->step);
        CHECK(f->width == 50);
        CHECK(f->rgb.size() == 3u * 50 * 50);
      }
      got.push_back(std::move(*m));
    }
    client.send(SessionCommand{4, cmd::Pause{}});
    client.finish();
    while (auto m = client.receive(10s)) got.push_back(std::move(*m));
    CHECK(count<AckMessage>(got) == 3);
    REQUIRE(count<ErrorMessage>(got) == 1);
  }
  auto fut = ended.get_future();
  REQUIRE(fut.wait_for(30s) == std::future_status::ready);
  const SessionLog log = fut.get();
  server.join();
  CHECK(log.entries.size() == 3);
  CHECK(log.final_step >= 1000);
  CHECK(replay(log, arena()).checksum() == log.final_checksum);
}

TEST_CASE("a client speaking another protocol version is refused") {
  ServerOptions opt;
  opt.port = 0;
  opt.initial = arena();
  opt.max_sessions = 1;
  std::promise<int> port;
  opt.on_listening = [&](int p) { port.set_value(p); };
  std::thread server([&] { serve(opt); });

  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  REQUIRE(fd >= 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(port.get_future().get()));
  ::inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr);
  REQUIRE(::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0);
  const auto hello = encode_message(HelloMessage{kProtocolVersion + 1, 0, 0, "old-client"});
  REQUIRE(::send(fd, hello.data(), hello.size(), MSG_NOSIGNAL) == static_cast<ssize_t>(hello.size()));

  MessageDecoder decoder;
  std::vector<Message> got;
  std::uint8_t buf[4096];
  for (;;) {
    const ssize_t n = ::recv(fd, buf, sizeof buf, 0);
    if (n <= 0) break;
    decoder.feed(std::span(buf, static_cast<std::size_t>(n)));
    while (auto m = decoder.next()) got.push_back(std::move(*m));
  }
  ::close(fd);
  server.join();
  REQUIRE(got.size() >= 2);
  CHECK(std::holds_alternative<HelloMessage>(got.front()));
  const auto* err = std::get_if<ErrorMessage>(&got.back());
  REQUIRE(err != nullptr);
  CHECK(err->fatal);
  CHECK(count<FrameMessage>(got) == 0);
}

TEST_CASE("steering over TCP: an impermeable stroke holds a wave back") {
  ServerOptions opt;
  opt.port = 0;
  opt.initial = arena();
  opt.session = {1, 1, 250, false};
  opt.max_sessions = 1;
  std::promise<int> port;
  std::promise<SessionLog> ended;
  opt.on_listening = [&](int p) { port.set_value(p); };
  opt.on_session_end = [&](const SessionLog& log) { ended.set_value(log); };
  std::thread server([&] { serve(opt); });

  const int wall = 50;
  const int w = preset_width(Permeability::impermeable);
  std::vector<FrameMessage> frames;
  std::optional<ImageMessage> snapshot;
  {
    SessionClient client("127.0.0.1", port.get_future().get());
    client.send(SessionCommand{1, cmd::Stroke{{StrokeKind::line, {{wall, -20}, {wall, 120}}, w, StrokeMode::add}}});
    client.send(SessionCommand{2, cmd::Stimulate{{25, 50}, 5}});
    client.send(SessionCommand{3, cmd::Play{}});
    while (frames.empty() || frames.back().step < 5000) {
      auto m = client.receive(20s);
      REQUIRE(m.has_value());
      if (auto* f = std::get_if<FrameMessage>(&*m)) frames.push_back(std::move(*f));
    }
    client.send(SessionCommand{4, cmd::Pause{}});
    client.send(SessionCommand{5, cmd::RequestSnapshot{}});
    client.finish();
    while (auto m = client.receive(20s)) {
      if (auto* i = std::get_if<ImageMessage>(&*m)) snapshot = std::move(*i);
    }
  }
  auto fut = ended.get_future();
  REQUIRE(fut.wait_for(30s) == std::future_status::ready);
  const SessionLog log = fut.get();
  server.join();

  // Red reaches the stroke from the left, and never shows on the far side.
  const std::uint8_t red_threshold = intensity(kFrontThreshold);
  bool reached_wall = false;
  for (const FrameMessage& f : frames) {
    for (int y = 0; y < f.height; ++y) {
      for (int x = 0; x < f.width; ++x) {
        const std::uint8_t r = f.rgb[3u * (static_cast<std::size_t>(y) * f.width + x)];
        if (x >= wall - w / 2 - 3 && x < wall - w / 2 && r >= red_threshold) reached_wall = true;
        if (x > wall + w / 2 + 1) REQUIRE(r < red_threshold);
      }
    }
  }
  CHECK(reached_wall);

  REQUIRE(snapshot.has_value());
  CHECK(sha256_hex(snapshot->png) == snapshot->sha256);
  // The server-side render of the same fields has the same digest.
  Simulation replayed = replay(log, arena());
  CHECK(snapshot->step == replayed.step());
  CHECK(sha256_hex(encode_png(replayed.snapshot())) == snapshot->sha256);
}
