#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "shadowbench/errors.hpp"

namespace shadowbench {

/// Dense row-major H x W x Channels array of doubles, channels interleaved.
template <int Channels>
class Raster {
  static_assert(Channels >= 1);

 public:
  static constexpr int channels = Channels;

  Raster() = default;
  Raster(int height, int width, double fill = 0.0) : height_(height), width_(width) {
    if (height < 0 || width < 0) throw ShapeError("negative raster dimension");
    data_.assign(static_cast<std::size_t>(height) * width * Channels, fill);
  }

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  std::size_t pixels() const noexcept { return static_cast<std::size_t>(height_) * width_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& at(int y, int x, int c = 0) { return data_[index(y, x, c)]; }
  double at(int y, int x, int c = 0) const { return data_[index(y, x, c)]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  std::size_t index(int y, int x, int c = 0) const noexcept {
    return (static_cast<std::size_t>(y) * width_ + x) * Channels + c;
  }

  template <int Other>
  bool same_extent(const Raster<Other>& other) const noexcept {
    return height_ == other.height() && width_ == other.width();
  }

  bool operator==(const Raster&) const = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<double> data_;
};

/// Unconstrained single-channel field (gradients, distances, sigma maps).
using Plane = Raster<1>;
/// Unconstrained three-channel array (per-pixel, per-channel gradients).
using PixelArray = Raster<3>;

template <int A, int B>
void require_same_extent(const Raster<A>& a, const Raster<B>& b, const char* what) {
  if (!a.same_extent(b)) {
    throw ShapeError(std::string(what) + ": dimension mismatch (" + std::to_string(a.height()) + "x" +
                     std::to_string(a.width()) + " vs " + std::to_string(b.height()) + "x" +
                     std::to_string(b.width()) + ")");
  }
}

template <int C>
double max_abs_diff(const Raster<C>& a, const Raster<C>& b) {
  require_same_extent(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace shadowbench
