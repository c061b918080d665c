#pragma once

#include "rdc/render.hpp"
#include "rdc/substrate.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace rdc {

namespace cmd {

struct LoadScenario {
  std::string text;
  bool operator==(const LoadScenario&) const = default;
};
struct Play {
  bool operator==(const Play&) const = default;
};
struct Pause {
  bool operator==(const Pause&) const = default;
};
struct SetRenderStride {
  std::int64_t stride = 1;
  bool operator==(const SetRenderStride&) const = default;
};
struct Stroke {
  StrokeSpec stroke;
  bool operator==(const Stroke&) const = default;
};
struct Stimulate {
  Pixel center;
  int radius = 3;
  bool operator==(const Stimulate&) const = default;
};
struct SetParam {
  std::string name;
  double value = 0.0;
  bool operator==(const SetParam&) const = default;
};
struct RequestSnapshot {
  bool operator==(const RequestSnapshot&) const = default;
};
struct TimelapseStart {
  std::int64_t stride = 1;
  bool operator==(const TimelapseStart&) const = default;
};
struct TimelapseStopSave {
  bool operator==(const TimelapseStopSave&) const = default;
};
struct Reset {
  bool operator==(const Reset&) const = default;
};

}  // namespace cmd

using CommandBody = std::variant<cmd::LoadScenario, cmd::Play, cmd::Pause, cmd::SetRenderStride,
                                 cmd::Stroke, cmd::Stimulate, cmd::SetParam, cmd::RequestSnapshot,
                                 cmd::TimelapseStart, cmd::TimelapseStopSave, cmd::Reset>;

/// A client request; `seq` is the client's sequence number, echoed in acks.
struct SessionCommand {
  std::uint64_t seq = 0;
  CommandBody body;
  bool operator==(const SessionCommand&) const = default;
};

/// Wire name of the command ("stimulate", "set_param", ...).
std::string command_type(const SessionCommand& command);

/// {"seq": 7, "type": "stimulate", "center": [x, y], "radius": 3}
nlohmann::json command_to_json(const SessionCommand& command);
/// Throws ValidationError on unknown types, missing or mistyped fields.
SessionCommand command_from_json(const nlohmann::json& j);

// Every message on the wire: u32 little-endian payload length, u8 tag, payload.

inline constexpr std::uint8_t kProtocolVersion = 1;
inline constexpr std::uint32_t kMaxPayload = 64u << 20;
inline constexpr std::size_t kFrameHeaderSize = 16;

enum class MessageTag : std::uint8_t {
  hello = 1,    // u8 version + JSON {"width", "height", "engine"}
  command = 2,  // JSON SessionCommand
  frame = 3,    // u64 step, u32 render_stride, u16 width, u16 height, RGB rows
  ack = 4,      // JSON {"seq", "applied_at_step"}
  error = 5,    // JSON {"seq" (or null), "message", "fatal"}
  image = 6,    // u32 JSON length, JSON {"kind", "step", "name", "sha256"}, PNG bytes
};

struct HelloMessage {
  std::uint8_t version = kProtocolVersion;
  int width = 0;  // zero in the client's hello
  int height = 0;
  std::string engine;
  bool operator==(const HelloMessage&) const = default;
};

struct FrameMessage {
  std::uint64_t step = 0;
  std::uint32_t render_stride = 0;
  std::uint16_t width = 0;
  std::uint16_t height = 0;
  std::vector<std::uint8_t> rgb;  // 3 * width * height bytes
  bool operator==(const FrameMessage&) const = default;
};

struct AckMessage {
  std::uint64_t seq = 0;
  std::int64_t applied_at_step = 0;
  bool operator==(const AckMessage&) const = default;
};

struct ErrorMessage {
  std::optional<std::uint64_t> seq;
  std::string message;
  bool fatal = false;
  bool operator==(const ErrorMessage&) const = default;
};

struct ImageMessage {
  ImageKind kind = ImageKind::snapshot;
  std::int64_t step = 0;
  std::string name;
  std::string sha256;
  std::vector<std::uint8_t> png;
  bool operator==(const ImageMessage&) const = default;
};

using Message = std::variant<HelloMessage, SessionCommand, FrameMessage, AckMessage, ErrorMessage,
                             ImageMessage>;

std::vector<std::uint8_t> encode_message(const Message& message);

/// Decodes exactly one complete message; throws ProtocolError on any
/// framing violation, including truncation and trailing bytes. A well-framed
/// command with invalid content throws ValidationError instead.
Message decode_message(std::span<const std::uint8_t> bytes);

/// Incremental decoder for a byte stream. Only complete messages come out.
class MessageDecoder {
public:
  void feed(std::span<const std::uint8_t> bytes);
  /// Next complete message, nullopt if more bytes are needed.
  std::optional<Message> next();
  std::size_t buffered() const { return buffer_.size() - offset_; }

private:
  std::vector<std::uint8_t> buffer_;
  std::size_t offset_ = 0;
};

/// Snapshot image as a frame, subsampled by an integer factor.
FrameMessage make_frame(const RGBImage& image, std::int64_t step, std::int64_t render_stride,
                        int downscale = 1);

}  // namespace rdc
