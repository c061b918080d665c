#pragma once

#include "rdc/errors.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace rdc {

struct Pixel {
  int x = 0;
  int y = 0;
  bool operator==(const Pixel&) const = default;
  auto operator<=>(const Pixel&) const = default;
};

/// Dense row-major 2D grid of concentrations; (x, y) = (column, row).
template <typename T>
class BasicField {
public:
  using value_type = T;

  BasicField() = default;
  BasicField(int width, int height, T fill = T{0}) : width_(width), height_(height) {
    if (width < 3 || height < 3) {
      throw ValidationError("field: extent must be at least 3x3 (got " +
                            std::to_string(width) + "x" + std::to_string(height) + ")");
    }
    values_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return values_.size(); }

  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }
  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

  T& operator()(int x, int y) { return values_[index(x, y)]; }
  const T& operator()(int x, int y) const { return values_[index(x, y)]; }

  std::span<T> values() { return values_; }
  std::span<const T> values() const { return values_; }
  std::span<T> row(int y) { return values().subspan(index(0, y), width_); }
  std::span<const T> row(int y) const { return values().subspan(index(0, y), width_); }

  bool same_extent(const BasicField<T>& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }
  template <typename U>
  bool same_extent(const BasicField<U>& other) const {
    return width_ == other.width() && height_ == other.height();
  }

  bool operator==(const BasicField&) const = default;

private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> values_;
};

using Field32 = BasicField<float>;
using Field64 = BasicField<double>;

}  // namespace rdc
