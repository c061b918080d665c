#pragma once

#include "rdc/field.hpp"
#include "rdc/params.hpp"

#include <cstdint>
#include <string_view>
#include <vector>

namespace rdc {

enum class StrokeKind { freehand, line, snap_line };
enum class StrokeMode { add, erase };
enum class Permeability { permeable, semi_permeable, impermeable };
enum class BackgroundMode { filled, empty };

std::string_view to_string(StrokeKind kind);
std::string_view to_string(StrokeMode mode);
std::string_view to_string(Permeability p);
std::string_view to_string(BackgroundMode mode);
StrokeKind parse_stroke_kind(std::string_view text);
StrokeMode parse_stroke_mode(std::string_view text);
Permeability parse_permeability(std::string_view text);
BackgroundMode parse_background(std::string_view text);

/// Line width presets: permeable 2, semi-permeable 3, impermeable 8.
int preset_width(Permeability p);

struct StrokeSpec {
  StrokeKind kind = StrokeKind::freehand;
  std::vector<Pixel> points;
  int width = 1;
  StrokeMode mode = StrokeMode::add;

  /// freehand >= 1 point, line kinds exactly 2, width >= 1.
  void validate() const;
  bool operator==(const StrokeSpec&) const = default;
};

/// Rotates p1 about p0 to the nearest multiple of 15 degrees (ties to the
/// smaller angle), keeping the length, then rounds to whole pixels.
Pixel snap_angle(Pixel p0, Pixel p1);

/// Stroke with snapping applied to snap_line endpoints.
StrokeSpec resolve_stroke(const StrokeSpec& stroke);

/**
 * Pixels whose centres lie within width/2 of the stroke polyline (a capsule
 * per segment), clipped to a width x height grid, sorted row-major.
 *
 * Even widths shift the polyline by half a pixel in x and y so the band is
 * centred on a pixel boundary and has exactly `width` rows (or columns) on
 * axis-aligned segments.
 */
std::vector<Pixel> rasterize_stroke(const StrokeSpec& stroke, int width, int height);

/// Boolean grid; true = inhibitive substrate present.
class SubstrateMask {
public:
  SubstrateMask(int width, int height, BackgroundMode background = BackgroundMode::empty);

  int width() const { return width_; }
  int height() const { return height_; }
  bool at(int x, int y) const { return cells_[index(x, y)] != 0; }
  std::size_t count() const;

  void fill(BackgroundMode background);
  /// Sets (add) or clears (erase) every rasterised pixel; returns the pixels touched.
  std::vector<Pixel> apply_stroke(const StrokeSpec& stroke);

  /// Row-major cell bytes (0/1), for hashing and rendering.
  const std::vector<std::uint8_t>& cells() const { return cells_; }

  bool operator==(const SubstrateMask&) const = default;

private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_;
  int height_;
  std::vector<std::uint8_t> cells_;
};

/// phi_passive on substrate, phi_active elsewhere.
template <typename T>
BasicField<T> phi_field(const SubstrateMask& mask, const OregonatorParams& params);

}  // namespace rdc
