#include "rdc/render.hpp"

#include "rdc/errors.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

namespace rdc {

RGBImage::RGBImage(int width, int height) : width_(width), height_(height) {
  if (width < 1 || height < 1) throw ValidationError("image: dimensions must be positive");
  data_.assign(3 * static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0);
}

std::uint8_t intensity(double c) {
  const double clamped = std::clamp(c, 0.0, 1.0);
  return static_cast<std::uint8_t>(std::lround(255.0 * clamped));
}

namespace {

void require_extent(int w, int h, const SubstrateMask& mask, const char* what) {
  if (w != mask.width() || h != mask.height()) {
    throw ValidationError(std::string(what) + ": " + std::to_string(w) + "x" + std::to_string(h) +
                          " does not match mask " + std::to_string(mask.width()) + "x" +
                          std::to_string(mask.height()));
  }
}

}  // namespace

template <typename T>
RGBImage render_snapshot(const BasicSimState<T>& state, const SubstrateMask& mask) {
  state.check_extents();
  require_extent(state.width(), state.height(), mask, "render_snapshot");
  RGBImage img(state.width(), state.height());
  for (int y = 0; y < state.height(); ++y) {
    for (int x = 0; x < state.width(); ++x) {
      std::uint8_t* px = img.pixel(x, y);
      px[0] = intensity(static_cast<double>(state.u(x, y)));
      px[1] = mask.at(x, y) ? 255 : 0;
      px[2] = intensity(static_cast<double>(state.v(x, y)));
    }
  }
  return img;
}

template RGBImage render_snapshot(const SimState32&, const SubstrateMask&);
template RGBImage render_snapshot(const SimState64&, const SubstrateMask&);

TimelapseAccumulator::TimelapseAccumulator(int width, int height, std::int64_t sample_stride)
    : max_u_(width, height, 0.0), sample_stride_(sample_stride) {
  if (sample_stride < 1) throw ValidationError("timelapse: stride must be >= 1");
}

template <typename T>
void TimelapseAccumulator::record(const BasicSimState<T>& state) {
  if (state.width() != max_u_.width() || state.height() != max_u_.height()) {
    throw ValidationError("timelapse: state extent does not match accumulator");
  }
  auto acc = max_u_.values();
  const auto u = state.u.values();
  if (samples_taken_ == 0) {
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] = static_cast<double>(u[i]);
  } else {
    for (std::size_t i = 0; i < acc.size(); ++i) {
      acc[i] = std::max(acc[i], static_cast<double>(u[i]));
    }
  }
  ++samples_taken_;
}

template void TimelapseAccumulator::record(const SimState32&);
template void TimelapseAccumulator::record(const SimState64&);

RGBImage render_timelapse(const TimelapseAccumulator& acc, const SubstrateMask& mask) {
  const Field64& m = acc.max_u();
  require_extent(m.width(), m.height(), mask, "render_timelapse");
  RGBImage img(m.width(), m.height());
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      std::uint8_t* px = img.pixel(x, y);
      px[0] = intensity(m(x, y));
      px[1] = mask.at(x, y) ? 255 : 0;
      px[2] = 0;
    }
  }
  return img;
}

RGBImage upscale(const RGBImage& image, int factor) {
  if (factor < 1) throw ValidationError("upscale: factor must be >= 1");
  RGBImage out(image.width() * factor, image.height() * factor);
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) {
      std::memcpy(out.pixel(x, y), image.pixel(x / factor, y / factor), 3);
    }
  }
  return out;
}

std::vector<std::uint8_t> encode_png(const RGBImage& image) {
  png_image desc;
  std::memset(&desc, 0, sizeof desc);
  desc.version = PNG_IMAGE_VERSION;
  desc.width = static_cast<png_uint_32>(image.width());
  desc.height = static_cast<png_uint_32>(image.height());
  desc.format = PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  if (!png_image_write_get_memory_size(desc, size, 0, image.bytes().data(), 0, nullptr)) {
    throw IoError(std::string("png encode: ") + desc.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&desc, out.data(), &size, 0, image.bytes().data(), 0, nullptr)) {
    throw IoError(std::string("png encode: ") + desc.message);
  }
  out.resize(size);
  return out;
}

RGBImage decode_png(const std::vector<std::uint8_t>& bytes) {
  png_image desc;
  std::memset(&desc, 0, sizeof desc);
  desc.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&desc, bytes.data(), bytes.size())) {
    throw IoError(std::string("png decode: ") + desc.message);
  }
  if (desc.width == 0 || desc.height == 0 || desc.width > 1u << 15 || desc.height > 1u << 15) {
    png_image_free(&desc);
    throw IoError("png decode: unsupported dimensions");
  }
  desc.format = PNG_FORMAT_RGB;
  RGBImage img(static_cast<int>(desc.width), static_cast<int>(desc.height));
  if (!png_image_finish_read(&desc, nullptr, img.bytes().data(), 0, nullptr)) {
    const std::string msg = desc.message;
    png_image_free(&desc);
    throw IoError("png decode: " + msg);
  }
  return img;
}

void write_png(const RGBImage& image, const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = encode_png(image);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

RGBImage read_png(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return decode_png(bytes);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

std::string image_file_name(const std::string& scenario_hash, std::int64_t step, ImageKind kind) {
  return scenario_hash + "-" + std::to_string(step) +
         (kind == ImageKind::snapshot ? "-snapshot.png" : "-timelapse.png");
}

}  // namespace rdc
