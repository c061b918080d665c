#include "rdc/protocol.hpp"

#include "rdc/errors.hpp"

#include <cstring>

using nlohmann::json;

namespace rdc {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

json pixel_json(Pixel p) { return json::array({p.x, p.y}); }

template <typename T>
T get(const json& j, const char* key) {
  if (!j.contains(key)) throw ValidationError(std::string("command: missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(std::string("command: field '") + key + "' has the wrong type");
  }
}

Pixel get_pixel(const json& j, const char* key) {
  const auto xy = get<std::vector<int>>(j, key);
  if (xy.size() != 2) throw ValidationError(std::string("command: '") + key + "' must be [x, y]");
  return {xy[0], xy[1]};
}

}  // namespace

std::string command_type(const SessionCommand& c) {
  return std::visit(overloaded{
                        [](const cmd::LoadScenario&) { return "load_scenario"; },
                        [](const cmd::Play&) { return "play"; },
                        [](const cmd::Pause&) { return "pause"; },
                        [](const cmd::SetRenderStride&) { return "set_render_stride"; },
                        [](const cmd::Stroke&) { return "stroke"; },
                        [](const cmd::Stimulate&) { return "stimulate"; },
                        [](const cmd::SetParam&) { return "set_param"; },
                        [](const cmd::RequestSnapshot&) { return "request_snapshot"; },
                        [](const cmd::TimelapseStart&) { return "timelapse_start"; },
                        [](const cmd::TimelapseStopSave&) { return "timelapse_stop_save"; },
                        [](const cmd::Reset&) { return "reset"; },
                    },
                    c.body);
}

json command_to_json(const SessionCommand& c) {
  json j = {{"seq", c.seq}, {"type", command_type(c)}};
  std::visit(overloaded{
                 [&](const cmd::LoadScenario& b) { j["text"] = b.text; },
                 [&](const cmd::SetRenderStride& b) { j["stride"] = b.stride; },
                 [&](const cmd::Stroke& b) {
                   json pts = json::array();
                   for (const Pixel& p : b.stroke.points) pts.push_back(pixel_json(p));
                   j["kind"] = to_string(b.stroke.kind);
                   j["mode"] = to_string(b.stroke.mode);
                   j["width"] = b.stroke.width;
                   j["points"] = pts;
                 },
                 [&](const cmd::Stimulate& b) {
                   j["center"] = pixel_json(b.center);
                   j["radius"] = b.radius;
                 },
                 [&](const cmd::SetParam& b) {
                   j["name"] = b.name;
                   j["value"] = b.value;
                 },
                 [&](const cmd::TimelapseStart& b) { j["stride"] = b.stride; },
                 [](const auto&) {},
             },
             c.body);
  return j;
}

SessionCommand command_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("command: expected a JSON object");
  SessionCommand c;
  if (!j.contains("seq") || !j.at("seq").is_number_unsigned()) {
    throw ValidationError("command: 'seq' must be a non-negative integer");
  }
  c.seq = get<std::uint64_t>(j, "seq");
  const auto stride = [&] {
    const auto n = get<std::int64_t>(j, "stride");
    if (n < 1) throw ValidationError("command: stride must be >= 1");
    return n;
  };
  const std::string type = get<std::string>(j, "type");
  if (type == "load_scenario") {
    c.body = cmd::LoadScenario{get<std::string>(j, "text")};
  } else if (type == "play") {
    c.body = cmd::Play{};
  } else if (type == "pause") {
    c.body = cmd::Pause{};
  } else if (type == "set_render_stride") {
    c.body = cmd::SetRenderStride{stride()};
  } else if (type == "stroke") {
    StrokeSpec s;
    s.kind = parse_stroke_kind(get<std::string>(j, "kind"));
    s.mode = parse_stroke_mode(get<std::string>(j, "mode"));
    s.width = get<int>(j, "width");
    const auto pts = get<std::vector<std::vector<int>>>(j, "points");
    for (const auto& p : pts) {
      if (p.size() != 2) throw ValidationError("command: stroke points must be [x, y]");
      s.points.push_back({p[0], p[1]});
    }
    s.validate();
    c.body = cmd::Stroke{std::move(s)};
  } else if (type == "stimulate") {
    c.body = cmd::Stimulate{get_pixel(j, "center"), get<int>(j, "radius")};
    if (std::get<cmd::Stimulate>(c.body).radius < 0) throw ValidationError("command: radius must be >= 0");
  } else if (type == "set_param") {
    c.body = cmd::SetParam{get<std::string>(j, "name"), get<double>(j, "value")};
  } else if (type == "request_snapshot") {
    c.body = cmd::RequestSnapshot{};
  } else if (type == "timelapse_start") {
    c.body = cmd::TimelapseStart{stride()};
  } else if (type == "timelapse_stop_save") {
    c.body = cmd::TimelapseStopSave{};
  } else if (type == "reset") {
    c.body = cmd::Reset{};
  } else {
    throw ValidationError("command: unknown type '" + type + "'");
  }
  return c;
}

namespace {

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_le(std::span<const std::uint8_t> bytes, std::size_t at, int width) {
  std::uint64_t v = 0;
  for (int i = 0; i < width; ++i) v |= static_cast<std::uint64_t>(bytes[at + i]) << (8 * i);
  return v;
}

void put_text(std::vector<std::uint8_t>& out, const std::string& text) {
  out.insert(out.end(), text.begin(), text.end());
}

json parse_json(std::span<const std::uint8_t> bytes) {
  try {
    return json::parse(bytes.begin(), bytes.end());
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed JSON payload: ") + e.what());
  }
}

std::string_view kind_name(ImageKind k) { return k == ImageKind::snapshot ? "snapshot" : "timelapse"; }

}  // namespace

std::vector<std::uint8_t> encode_message(const Message& message) {
  std::vector<std::uint8_t> payload;
  MessageTag tag{};
  std::visit(overloaded{
                 [&](const HelloMessage& m) {
                   tag = MessageTag::hello;
                   payload.push_back(m.version);
                   put_text(payload,
                            json{{"width", m.width}, {"height", m.height}, {"engine", m.engine}}.dump());
                 },
                 [&](const SessionCommand& m) {
                   tag = MessageTag::command;
                   put_text(payload, command_to_json(m).dump());
                 },
                 [&](const FrameMessage& m) {
                   if (m.rgb.size() != 3u * m.width * m.height) {
                     throw ProtocolError("frame: pixel buffer does not match its dimensions");
                   }
                   tag = MessageTag::frame;
                   put_u64(payload, m.step);
                   put_u32(payload, m.render_stride);
                   put_u16(payload, m.width);
                   put_u16(payload, m.height);
                   payload.insert(payload.end(), m.rgb.begin(), m.rgb.end());
                 },
                 [&](const AckMessage& m) {
                   tag = MessageTag::ack;
                   put_text(payload, json{{"seq", m.seq}, {"applied_at_step", m.applied_at_step}}.dump());
                 },
                 [&](const ErrorMessage& m) {
                   tag = MessageTag::error;
                   json j{{"message", m.message}, {"fatal", m.fatal}};
                   j["seq"] = m.seq ? json(*m.seq) : json(nullptr);
                   put_text(payload, j.dump());
                 },
                 [&](const ImageMessage& m) {
                   tag = MessageTag::image;
                   const std::string header = json{{"kind", kind_name(m.kind)},
                                                   {"step", m.step},
                                                   {"name", m.name},
                                                   {"sha256", m.sha256}}
                                                  .dump();
                   put_u32(payload, static_cast<std::uint32_t>(header.size()));
                   put_text(payload, header);
                   payload.insert(payload.end(), m.png.begin(), m.png.end());
                 },
             },
             message);
  if (payload.size() > kMaxPayload) throw ProtocolError("message exceeds the payload limit");
  std::vector<std::uint8_t> out;
  out.reserve(5 + payload.size());
  put_u32(out, static_cast<std::uint32_t>(payload.size()));
  out.push_back(static_cast<std::uint8_t>(tag));
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

namespace {

Message decode_payload(MessageTag tag, std::span<const std::uint8_t> p) {
  switch (tag) {
    case MessageTag::hello: {
      if (p.empty()) throw ProtocolError("hello: missing version byte");
      HelloMessage m;
      m.version = p[0];
      const json j = parse_json(p.subspan(1));
      try {
        m.width = j.at("width").get<int>();
        m.height = j.at("height").get<int>();
        m.engine = j.at("engine").get<std::string>();
      } catch (const json::exception& e) {
        throw ProtocolError(std::string("hello: ") + e.what());
      }
      return m;
    }
    case MessageTag::command:
      return command_from_json(parse_json(p));
    case MessageTag::frame: {
      if (p.size() < kFrameHeaderSize) throw ProtocolError("frame: short header");
      FrameMessage m;
      m.step = get_le(p, 0, 8);
      m.render_stride = static_cast<std::uint32_t>(get_le(p, 8, 4));
      m.width = static_cast<std::uint16_t>(get_le(p, 12, 2));
      m.height = static_cast<std::uint16_t>(get_le(p, 14, 2));
      if (p.size() != kFrameHeaderSize + 3u * m.width * m.height) {
        throw ProtocolError("frame: payload length does not match dimensions");
      }
      m.rgb.assign(p.begin() + kFrameHeaderSize, p.end());
      return m;
    }
    case MessageTag::ack: {
      const json j = parse_json(p);
      try {
        return AckMessage{j.at("seq").get<std::uint64_t>(), j.at("applied_at_step").get<std::int64_t>()};
      } catch (const json::exception& e) {
        throw ProtocolError(std::string("ack: ") + e.what());
      }
    }
    case MessageTag::error: {
      const json j = parse_json(p);
      try {
        ErrorMessage m;
        if (!j.at("seq").is_null()) m.seq = j.at("seq").get<std::uint64_t>();
        m.message = j.at("message").get<std::string>();
        m.fatal = j.at("fatal").get<bool>();
        return m;
      } catch (const json::exception& e) {
        throw ProtocolError(std::string("error: ") + e.what());
      }
    }
    case MessageTag::image: {
      if (p.size() < 4) throw ProtocolError("image: short header");
      const std::size_t len = get_le(p, 0, 4);
      if (len > p.size() - 4) throw ProtocolError("image: header overruns payload");
      const json j = parse_json(p.subspan(4, len));
      ImageMessage m;
      try {
        const std::string kind = j.at("kind").get<std::string>();
        if (kind != "snapshot" && kind != "timelapse") throw ProtocolError("image: unknown kind");
        m.kind = kind == "snapshot" ? ImageKind::snapshot : ImageKind::timelapse;
        m.step = j.at("step").get<std::int64_t>();
        m.name = j.at("name").get<std::string>();
        m.sha256 = j.at("sha256").get<std::string>();
      } catch (const json::exception& e) {
        throw ProtocolError(std::string("image: ") + e.what());
      }
      m.png.assign(p.begin() + 4 + static_cast<std::ptrdiff_t>(len), p.end());
      return m;
    }
  }
  throw ProtocolError("unknown message tag " + std::to_string(static_cast<int>(tag)));
}

}  // namespace

Message decode_message(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 5) throw ProtocolError("truncated message header");
  const std::uint64_t length = get_le(bytes, 0, 4);
  if (length > kMaxPayload) throw ProtocolError("payload length exceeds the limit");
  if (bytes.size() < 5 + length) throw ProtocolError("truncated message payload");
  if (bytes.size() > 5 + length) throw ProtocolError("trailing bytes after message");
  return decode_payload(static_cast<MessageTag>(bytes[4]), bytes.subspan(5));
}

void MessageDecoder::feed(std::span<const std::uint8_t> bytes) {
  if (offset_ > 0 && offset_ == buffer_.size()) {
    buffer_.clear();
    offset_ = 0;
  }
  buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());
}

std::optional<Message> MessageDecoder::next() {
  const std::span<const std::uint8_t> rest(buffer_.data() + offset_, buffer_.size() - offset_);
  if (rest.size() < 5) return std::nullopt;
  const std::uint64_t length = get_le(rest, 0, 4);
  if (length > kMaxPayload) throw ProtocolError("payload length exceeds the limit");
  if (rest.size() < 5 + length) return std::nullopt;
  const std::vector<std::uint8_t> one(rest.begin(), rest.begin() + 5 + static_cast<std::ptrdiff_t>(length));
  // Consume first: a message that fails to decode must not be seen again.
  offset_ += one.size();
  if (offset_ > (1u << 20) && offset_ * 2 > buffer_.size()) {
    buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(offset_));
    offset_ = 0;
  }
  return decode_message(one);
}

FrameMessage make_frame(const RGBImage& image, std::int64_t step, std::int64_t render_stride,
                        int downscale) {
  if (downscale < 1) throw ValidationError("frame: downscale must be >= 1");
  const int w = image.width() / downscale;
  const int h = image.height() / downscale;
  if (w < 1 || h < 1 || w > 0xffff || h > 0xffff) throw ValidationError("frame: bad dimensions");
  FrameMessage f;
  f.step = static_cast<std::uint64_t>(step);
  f.render_stride = static_cast<std::uint32_t>(render_stride);
  f.width = static_cast<std::uint16_t>(w);
  f.height = static_cast<std::uint16_t>(h);
  f.rgb.resize(3u * w * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      std::memcpy(&f.rgb[3u * (static_cast<std::size_t>(y) * w + x)],
                  image.pixel(x * downscale, y * downscale), 3);
    }
  }
  return f;
}

}  // namespace rdc
