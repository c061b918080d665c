#include "rdc/substrate.hpp"

#include "rdc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace rdc {

std::string_view to_string(StrokeKind kind) {
  switch (kind) {
    case StrokeKind::freehand: return "freehand";
    case StrokeKind::line: return "line";
    case StrokeKind::snap_line: return "snap_line";
  }
  return "?";
}

std::string_view to_string(StrokeMode mode) {
  return mode == StrokeMode::add ? "add" : "erase";
}

std::string_view to_string(Permeability p) {
  switch (p) {
    case Permeability::permeable: return "permeable";
    case Permeability::semi_permeable: return "semi_permeable";
    case Permeability::impermeable: return "impermeable";
  }
  return "?";
}

std::string_view to_string(BackgroundMode mode) {
  return mode == BackgroundMode::filled ? "filled" : "empty";
}

StrokeKind parse_stroke_kind(std::string_view text) {
  if (text == "freehand") return StrokeKind::freehand;
  if (text == "line") return StrokeKind::line;
  if (text == "snap_line") return StrokeKind::snap_line;
  throw ValidationError("unknown stroke kind '" + std::string(text) + "'");
}

StrokeMode parse_stroke_mode(std::string_view text) {
  if (text == "add") return StrokeMode::add;
  if (text == "erase") return StrokeMode::erase;
  throw ValidationError("unknown stroke mode '" + std::string(text) + "'");
}

Permeability parse_permeability(std::string_view text) {
  if (text == "permeable") return Permeability::permeable;
  if (text == "semi_permeable") return Permeability::semi_permeable;
  if (text == "impermeable") return Permeability::impermeable;
  throw ValidationError("unknown permeability '" + std::string(text) + "'");
}

BackgroundMode parse_background(std::string_view text) {
  if (text == "filled") return BackgroundMode::filled;
  if (text == "empty") return BackgroundMode::empty;
  throw ValidationError("unknown background '" + std::string(text) + "'");
}

int preset_width(Permeability p) {
  switch (p) {
    case Permeability::permeable: return 2;
    case Permeability::semi_permeable: return 3;
    case Permeability::impermeable: return 8;
  }
  return 1;
}

void StrokeSpec::validate() const {
  if (width < 1) throw ValidationError("stroke: width must be >= 1");
  if (kind == StrokeKind::freehand) {
    if (points.empty()) throw ValidationError("stroke: freehand needs at least one point");
  } else if (points.size() != 2) {
    throw ValidationError("stroke: " + std::string(to_string(kind)) +
                          " needs exactly two points");
  }
}

Pixel snap_angle(Pixel p0, Pixel p1) {
  if (p0 == p1) throw ValidationError("snap_angle: endpoints coincide, direction undefined");
  const double dx = p1.x - p0.x;
  const double dy = p1.y - p0.y;
  const double length = std::hypot(dx, dy);
  const double degrees = std::atan2(dy, dx) * 180.0 / std::numbers::pi;
  // Nearest multiple of 15; an exact half-way angle goes to the smaller one.
  const double snapped = std::ceil(degrees / 15.0 - 0.5) * 15.0;
  const double radians = snapped * std::numbers::pi / 180.0;
  return {p0.x + static_cast<int>(std::lround(length * std::cos(radians))),
          p0.y + static_cast<int>(std::lround(length * std::sin(radians)))};
}

StrokeSpec resolve_stroke(const StrokeSpec& stroke) {
  stroke.validate();
  if (stroke.kind != StrokeKind::snap_line) return stroke;
  StrokeSpec out = stroke;
  out.points[1] = snap_angle(stroke.points[0], stroke.points[1]);
  return out;
}

namespace {

// Coordinates doubled so half-pixel offsets stay integral; all tests exact.
struct Point2 {
  long long x;
  long long y;
};

bool within(Point2 p, Point2 a, Point2 b, long long r2) {
  const long long abx = b.x - a.x;
  const long long aby = b.y - a.y;
  const long long apx = p.x - a.x;
  const long long apy = p.y - a.y;
  const long long bpx = p.x - b.x;
  const long long bpy = p.y - b.y;
  const long long len2 = abx * abx + aby * aby;
  if (len2 == 0 || apx * abx + apy * aby <= 0) return apx * apx + apy * apy <= r2;
  if (bpx * abx + bpy * aby >= 0) return bpx * bpx + bpy * bpy <= r2;
  const long long cross = apx * aby - apy * abx;
  // cross^2 <= r2 * len2, in 128 bits to stay exact on long strokes.
  return static_cast<__int128>(cross) * cross <= static_cast<__int128>(r2) * len2;
}

}  // namespace

std::vector<Pixel> rasterize_stroke(const StrokeSpec& raw, int width, int height) {
  const StrokeSpec stroke = resolve_stroke(raw);
  const long long shift = stroke.width % 2 == 0 ? 1 : 0;
  const long long r2 = static_cast<long long>(stroke.width) * stroke.width;
  const int reach = stroke.width / 2 + 1;

  std::vector<Point2> poly;
  poly.reserve(stroke.points.size());
  for (const Pixel& p : stroke.points) poly.push_back({2LL * p.x + shift, 2LL * p.y + shift});
  if (poly.size() == 1) poly.push_back(poly.front());

  std::vector<std::uint8_t> hit(static_cast<std::size_t>(width) * static_cast<std::size_t>(height),
                                0);
  for (std::size_t i = 0; i + 1 < poly.size(); ++i) {
    const Point2 a = poly[i];
    const Point2 b = poly[i + 1];
    const long long x0 = std::max<long long>(std::min(a.x, b.x) / 2 - reach, 0);
    const long long x1 = std::min<long long>(std::max(a.x, b.x) / 2 + reach, width - 1);
    const long long y0 = std::max<long long>(std::min(a.y, b.y) / 2 - reach, 0);
    const long long y1 = std::min<long long>(std::max(a.y, b.y) / 2 + reach, height - 1);
    for (long long y = y0; y <= y1; ++y) {
      for (long long x = x0; x <= x1; ++x) {
        if (within({2 * x, 2 * y}, a, b, r2)) {
          hit[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
              static_cast<std::size_t>(x)] = 1;
        }
      }
    }
  }

  std::vector<Pixel> out;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      if (hit[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
              static_cast<std::size_t>(x)]) {
        out.push_back({x, y});
      }
    }
  }
  return out;
}

SubstrateMask::SubstrateMask(int width, int height, BackgroundMode background)
    : width_(width), height_(height) {
  if (width < 3 || height < 3) throw ValidationError("mask: extent must be at least 3x3");
  fill(background);
}

std::size_t SubstrateMask::count() const {
  return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), std::uint8_t{1}));
}

void SubstrateMask::fill(BackgroundMode background) {
  cells_.assign(static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_),
                background == BackgroundMode::filled ? 1 : 0);
}

std::vector<Pixel> SubstrateMask::apply_stroke(const StrokeSpec& stroke) {
  std::vector<Pixel> covered = rasterize_stroke(stroke, width_, height_);
  const std::uint8_t value = stroke.mode == StrokeMode::add ? 1 : 0;
  for (const Pixel& p : covered) cells_[index(p.x, p.y)] = value;
  return covered;
}

template <typename T>
BasicField<T> phi_field(const SubstrateMask& mask, const OregonatorParams& params) {
  BasicField<T> phi(mask.width(), mask.height());
  const T active = static_cast<T>(params.phi_active);
  const T passive = static_cast<T>(params.phi_passive);
  auto out = phi.values();
  const auto& cells = mask.cells();
  for (std::size_t i = 0; i < cells.size(); ++i) out[i] = cells[i] ? passive : active;
  return phi;
}

template BasicField<float> phi_field(const SubstrateMask&, const OregonatorParams&);
template BasicField<double> phi_field(const SubstrateMask&, const OregonatorParams&);

}  // namespace rdc
