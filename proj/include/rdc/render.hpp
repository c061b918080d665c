#pragma once

#include "rdc/model.hpp"
#include "rdc/substrate.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace rdc {

/// Row-major 8-bit RGB.
class RGBImage {
public:
  RGBImage(int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }
  std::uint8_t* pixel(int x, int y) { return &data_[offset(x, y)]; }
  const std::uint8_t* pixel(int x, int y) const { return &data_[offset(x, y)]; }
  const std::vector<std::uint8_t>& bytes() const { return data_; }
  std::vector<std::uint8_t>& bytes() { return data_; }

  bool operator==(const RGBImage&) const = default;

private:
  std::size_t offset(int x, int y) const {
    return 3 * (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
                static_cast<std::size_t>(x));
  }

  int width_;
  int height_;
  std::vector<std::uint8_t> data_;
};

/// round(255 * clamp(c, 0, 1)).
std::uint8_t intensity(double c);

/// R = u, G = substrate, B = v.
template <typename T>
RGBImage render_snapshot(const BasicSimState<T>& state, const SubstrateMask& mask);

/// Per-pixel running maximum of u over recorded states.
class TimelapseAccumulator {
public:
  TimelapseAccumulator(int width, int height, std::int64_t sample_stride = 1);

  template <typename T>
  void record(const BasicSimState<T>& state);

  const Field64& max_u() const { return max_u_; }
  std::int64_t sample_stride() const { return sample_stride_; }
  std::int64_t samples_taken() const { return samples_taken_; }

private:
  Field64 max_u_;
  std::int64_t sample_stride_;
  std::int64_t samples_taken_ = 0;
};

/// R = max u, G = substrate, B = 0.
RGBImage render_timelapse(const TimelapseAccumulator& acc, const SubstrateMask& mask);

/// Nearest-neighbour replication.
RGBImage upscale(const RGBImage& image, int factor);

/// Lossless 8-bit RGB PNG, fixed encoder settings.
std::vector<std::uint8_t> encode_png(const RGBImage& image);
RGBImage decode_png(const std::vector<std::uint8_t>& bytes);
void write_png(const RGBImage& image, const std::filesystem::path& path);
RGBImage read_png(const std::filesystem::path& path);

enum class ImageKind { snapshot, timelapse };

/// <hash>-<step>-snapshot.png / <hash>-<step>-timelapse.png
std::string image_file_name(const std::string& scenario_hash, std::int64_t step, ImageKind kind);

}  // namespace rdc
