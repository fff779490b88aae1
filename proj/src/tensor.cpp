#include "shadowbench/tensor.hpp"

#include <string>

#include "shadowbench/kernels.hpp"

namespace shadowbench {

Tensor::Tensor(int n, int c, int h, int w, double fill) : shape_{n, c, h, w} {
  if (n < 1 || c < 1 || h < 1 || w < 1) throw ShapeError("tensor dimensions must all be >= 1");
  data_.assign(static_cast<std::size_t>(n) * c * h * w, fill);
}

std::span<double> Tensor::sample(int n) {
  const std::size_t block = static_cast<std::size_t>(shape_[1]) * shape_[2] * shape_[3];
  return std::span<double>(data_).subspan(n * block, block);
}

std::span<const double> Tensor::sample(int n) const {
  const std::size_t block = static_cast<std::size_t>(shape_[1]) * shape_[2] * shape_[3];
  return std::span<const double>(data_).subspan(n * block, block);
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols != b.rows)
    throw ShapeError("matmul: inner dimensions " + std::to_string(a.cols) + " and " + std::to_string(b.rows));
  Matrix c(a.rows, b.cols);
  kernels::matmul(a.data, b.data, c.data, a.rows, a.cols, b.cols);
  return c;
}

Matrix positions_by_channels(const Tensor& x, int n) {
  const int hw = x.positions(), ch = x.channels();
  Matrix m(hw, ch);
  const auto s = x.sample(n);
  for (int c = 0; c < ch; ++c)
    for (int p = 0; p < hw; ++p) m(p, c) = s[static_cast<std::size_t>(c) * hw + p];
  return m;
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
  if (a.batch() != b.batch() || a.height() != b.height() || a.width() != b.width())
    throw ShapeError("concat_channels: batch or spatial extents differ");
  Tensor out(a.batch(), a.channels() + b.channels(), a.height(), a.width());
  for (int n = 0; n < a.batch(); ++n) {
    auto dst = out.sample(n);
    const auto sa = a.sample(n), sb = b.sample(n);
    std::copy(sa.begin(), sa.end(), dst.begin());
    std::copy(sb.begin(), sb.end(), dst.begin() + sa.size());
  }
  return out;
}

Tensor tensor_from_image(const Image& img) {
  Tensor t(1, 3, img.height(), img.width());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      for (int c = 0; c < 3; ++c) t.at(0, c, y, x) = img.at(y, x, c);
  return t;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (!a.same_shape(b)) throw ShapeError(std::string(what) + ": tensor shapes differ");
}

}  // namespace shadowbench
