#pragma once

// Data-parallel inner loops. Each OpenMP kernel has a serial reference kept
// for tests and for bench/bench_kernels.cpp. Parallel kernels use a fixed
// per-output summation order, so results do not depend on the thread count.

#include <cstddef>
#include <span>
#include <vector>

namespace shadowbench::kernels {

/// Precomputed spatially-varying Gaussian: per pixel a truncated radius
/// ceil(3 sigma) and the 1-D half-kernel exp(-k^2 / (2 sigma^2)), k = 0..r.
/// Taps falling outside the image are dropped and the rest renormalized.
struct BlurPlan {
  int height = 0;
  int width = 0;
  int max_radius = 0;
  std::vector<int> radius;
  std::vector<std::size_t> offset;
  std::vector<double> taps;
  std::vector<double> inv_norm;
};

/// sigma below this is treated as "no blur" (radius 0, identity).
inline constexpr double kMinSigma = 1e-6;

BlurPlan make_blur_plan(std::span<const double> sigma, int height, int width);

void blur(const BlurPlan& plan, std::span<const double> in, std::span<double> out);
/// Adjoint of blur (transpose of the linear map), gathered per output pixel.
void blur_adjoint(const BlurPlan& plan, std::span<const double> upstream, std::span<double> out);

/// Direct evaluation of the blur, recomputing every weight with exp().
void blur_reference(std::span<const double> sigma, int height, int width, std::span<const double> in,
                    std::span<double> out);
/// Scatter form of the adjoint.
void blur_adjoint_reference(std::span<const double> sigma, int height, int width, std::span<const double> upstream,
                            std::span<double> out);

struct Conv2dShape {
  int in_channels = 0;
  int out_channels = 0;
  int kernel = 1;
  int stride = 1;
  int pad = 0;
  int height = 0;  // input
  int width = 0;

  int out_height() const { return (height + 2 * pad - kernel) / stride + 1; }
  int out_width() const { return (width + 2 * pad - kernel) / stride + 1; }
};

/// Single-image 2-D convolution (cross-correlation). Layouts: input C_in x H x W,
/// weight C_out x C_in x k x k, bias C_out, output C_out x H_out x W_out.
void conv2d(const Conv2dShape& s, std::span<const double> input, std::span<const double> weight,
            std::span<const double> bias, std::span<double> output);
void conv2d_reference(const Conv2dShape& s, std::span<const double> input, std::span<const double> weight,
                      std::span<const double> bias, std::span<double> output);

/// Row-major C (m x n) = A (m x k) * B (k x n).
void matmul(std::span<const double> a, std::span<const double> b, std::span<double> c, int m, int k, int n);
void matmul_reference(std::span<const double> a, std::span<const double> b, std::span<double> c, int m, int k,
                      int n);

/// In-place numerically-stable softmax over each row of an m x n matrix.
void softmax_rows(std::span<double> logits, int m, int n);

}  // namespace shadowbench::kernels
