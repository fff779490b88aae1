#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "shadowbench/errors.hpp"
#include "shadowbench/imaging.hpp"

namespace shadowbench {

/// Dense N x C x H x W array of doubles.
class Tensor {
 public:
  Tensor() = default;
  Tensor(int n, int c, int h, int w, double fill = 0.0);

  int batch() const noexcept { return shape_[0]; }
  int channels() const noexcept { return shape_[1]; }
  int height() const noexcept { return shape_[2]; }
  int width() const noexcept { return shape_[3]; }
  int positions() const noexcept { return shape_[2] * shape_[3]; }
  const std::array<int, 4>& shape() const noexcept { return shape_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& at(int n, int c, int y, int x) { return data_[offset(n, c, y, x)]; }
  double at(int n, int c, int y, int x) const { return data_[offset(n, c, y, x)]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }
  /// Contiguous C x H x W block of batch element n.
  std::span<double> sample(int n);
  std::span<const double> sample(int n) const;

  bool same_shape(const Tensor& o) const noexcept { return shape_ == o.shape_; }
  bool operator==(const Tensor&) const = default;

 private:
  std::size_t offset(int n, int c, int y, int x) const noexcept {
    return ((static_cast<std::size_t>(n) * shape_[1] + c) * shape_[2] + y) * shape_[3] + x;
  }

  std::array<int, 4> shape_{0, 0, 0, 0};
  std::vector<double> data_;
};

/// Row-major matrix.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c, double fill = 0.0) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, fill) {}

  double& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
  bool operator==(const Matrix&) const = default;
};

Matrix matmul(const Matrix& a, const Matrix& b);

/// Batch element n as an HW x C matrix (one row per spatial position).
Matrix positions_by_channels(const Tensor& x, int n);

/// Concatenate along channels; batch and spatial extents must agree.
Tensor concat_channels(const Tensor& a, const Tensor& b);

/// 1 x 3 x H x W tensor of an image.
Tensor tensor_from_image(const Image& img);

void require_same_shape(const Tensor& a, const Tensor& b, const char* what);

}  // namespace shadowbench
