#include "shadowbench/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "shadowbench/errors.hpp"

namespace shadowbench::kernels {
namespace {

int radius_for(double sigma) { return sigma < kMinSigma ? 0 : static_cast<int>(std::ceil(3.0 * sigma)); }

void check_plane(std::span<const double> v, int height, int width, const char* what) {
  if (v.size() != static_cast<std::size_t>(height) * width) throw ShapeError(std::string(what) + ": size mismatch");
}

// One output pixel of the forward blur. Row sums first, then weighted by the
// vertical tap; this order is shared by every caller.
double blur_pixel(const BlurPlan& plan, std::span<const double> in, int y, int x) {
  const std::size_t p = static_cast<std::size_t>(y) * plan.width + x;
  const int r = plan.radius[p];
  const double* t = plan.taps.data() + plan.offset[p];
  const int y0 = std::max(0, y - r), y1 = std::min(plan.height - 1, y + r);
  const int x0 = std::max(0, x - r), x1 = std::min(plan.width - 1, x + r);
  double acc = 0.0;
  for (int yy = y0; yy <= y1; ++yy) {
    const double* row = in.data() + static_cast<std::size_t>(yy) * plan.width;
    double racc = 0.0;
    for (int xx = x0; xx <= x1; ++xx) racc += t[std::abs(xx - x)] * row[xx];
    acc += t[std::abs(yy - y)] * racc;
  }
  return acc * plan.inv_norm[p];
}

double blur_adjoint_pixel(const BlurPlan& plan, std::span<const double> upstream, int qy, int qx) {
  const int big = plan.max_radius;
  const int y0 = std::max(0, qy - big), y1 = std::min(plan.height - 1, qy + big);
  const int x0 = std::max(0, qx - big), x1 = std::min(plan.width - 1, qx + big);
  double acc = 0.0;
  for (int py = y0; py <= y1; ++py) {
    const int dy = std::abs(py - qy);
    for (int px = x0; px <= x1; ++px) {
      const std::size_t p = static_cast<std::size_t>(py) * plan.width + px;
      const int r = plan.radius[p];
      const int dx = std::abs(px - qx);
      if (dy > r || dx > r) continue;
      const double* t = plan.taps.data() + plan.offset[p];
      acc += t[dy] * t[dx] * plan.inv_norm[p] * upstream[p];
    }
  }
  return acc;
}

}  // namespace

BlurPlan make_blur_plan(std::span<const double> sigma, int height, int width) {
  check_plane(sigma, height, width, "make_blur_plan");
  BlurPlan plan;
  plan.height = height;
  plan.width = width;
  const std::size_t n = sigma.size();
  plan.radius.resize(n);
  plan.offset.resize(n);
  plan.inv_norm.resize(n);
  std::size_t total = 0;
  for (std::size_t p = 0; p < n; ++p) {
    plan.radius[p] = radius_for(sigma[p]);
    plan.offset[p] = total;
    total += static_cast<std::size_t>(plan.radius[p]) + 1;
    plan.max_radius = std::max(plan.max_radius, plan.radius[p]);
  }
  plan.taps.resize(total);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const std::size_t p = static_cast<std::size_t>(y) * width + x;
      const int r = plan.radius[p];
      double* t = plan.taps.data() + plan.offset[p];
      t[0] = 1.0;
      const double inv = r > 0 ? 1.0 / (2.0 * sigma[p] * sigma[p]) : 0.0;
      for (int k = 1; k <= r; ++k) t[k] = std::exp(-static_cast<double>(k) * k * inv);
      double sy = 0.0, sx = 0.0;
      for (int yy = std::max(0, y - r); yy <= std::min(height - 1, y + r); ++yy) sy += t[std::abs(yy - y)];
      for (int xx = std::max(0, x - r); xx <= std::min(width - 1, x + r); ++xx) sx += t[std::abs(xx - x)];
      plan.inv_norm[p] = 1.0 / (sy * sx);
    }
  }
  return plan;
}

void blur(const BlurPlan& plan, std::span<const double> in, std::span<double> out) {
  check_plane(in, plan.height, plan.width, "blur");
  check_plane(out, plan.height, plan.width, "blur");
#pragma omp parallel for schedule(static)
  for (int y = 0; y < plan.height; ++y)
    for (int x = 0; x < plan.width; ++x) out[static_cast<std::size_t>(y) * plan.width + x] = blur_pixel(plan, in, y, x);
}

void blur_adjoint(const BlurPlan& plan, std::span<const double> upstream, std::span<double> out) {
  check_plane(upstream, plan.height, plan.width, "blur_adjoint");
  check_plane(out, plan.height, plan.width, "blur_adjoint");
#pragma omp parallel for schedule(static)
  for (int y = 0; y < plan.height; ++y)
    for (int x = 0; x < plan.width; ++x)
      out[static_cast<std::size_t>(y) * plan.width + x] = blur_adjoint_pixel(plan, upstream, y, x);
}

void blur_reference(std::span<const double> sigma, int height, int width, std::span<const double> in,
                    std::span<double> out) {
  check_plane(sigma, height, width, "blur_reference");
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double s = sigma[static_cast<std::size_t>(y) * width + x];
      const int r = radius_for(s);
      double acc = 0.0, norm = 0.0;
      for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
          const int yy = y + dy, xx = x + dx;
          if (yy < 0 || yy >= height || xx < 0 || xx >= width) continue;
          const double w = r == 0 ? 1.0 : std::exp(-(dx * dx + dy * dy) / (2.0 * s * s));
          acc += w * in[static_cast<std::size_t>(yy) * width + xx];
          norm += w;
        }
      }
      out[static_cast<std::size_t>(y) * width + x] = acc / norm;
    }
  }
}

void blur_adjoint_reference(std::span<const double> sigma, int height, int width, std::span<const double> upstream,
                            std::span<double> out) {
  check_plane(sigma, height, width, "blur_adjoint_reference");
  std::fill(out.begin(), out.end(), 0.0);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double s = sigma[static_cast<std::size_t>(y) * width + x];
      const int r = radius_for(s);
      double norm = 0.0;
      for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) {
          const int yy = y + dy, xx = x + dx;
          if (yy < 0 || yy >= height || xx < 0 || xx >= width) continue;
          norm += r == 0 ? 1.0 : std::exp(-(dx * dx + dy * dy) / (2.0 * s * s));
        }
      const double u = upstream[static_cast<std::size_t>(y) * width + x] / norm;
      for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) {
          const int yy = y + dy, xx = x + dx;
          if (yy < 0 || yy >= height || xx < 0 || xx >= width) continue;
          const double w = r == 0 ? 1.0 : std::exp(-(dx * dx + dy * dy) / (2.0 * s * s));
          out[static_cast<std::size_t>(yy) * width + xx] += w * u;
        }
    }
  }
}

void conv2d(const Conv2dShape& s, std::span<const double> input, std::span<const double> weight,
            std::span<const double> bias, std::span<double> output) {
  const int ho = s.out_height(), wo = s.out_width();
  const std::size_t in_plane = static_cast<std::size_t>(s.height) * s.width;
  const std::size_t out_plane = static_cast<std::size_t>(ho) * wo;
  const int k = s.kernel;
#pragma omp parallel for schedule(static)
  for (int co = 0; co < s.out_channels; ++co) {
    double* dst = output.data() + co * out_plane;
    std::fill(dst, dst + out_plane, bias.empty() ? 0.0 : bias[co]);
    for (int ci = 0; ci < s.in_channels; ++ci) {
      const double* src = input.data() + ci * in_plane;
      const double* w = weight.data() + (static_cast<std::size_t>(co) * s.in_channels + ci) * k * k;
      for (int ky = 0; ky < k; ++ky) {
        for (int kx = 0; kx < k; ++kx) {
          const double wv = w[ky * k + kx];
          if (wv == 0.0) continue;
          for (int oy = 0; oy < ho; ++oy) {
            const int iy = oy * s.stride - s.pad + ky;
            if (iy < 0 || iy >= s.height) continue;
            double* drow = dst + static_cast<std::size_t>(oy) * wo;
            const double* srow = src + static_cast<std::size_t>(iy) * s.width;
            for (int ox = 0; ox < wo; ++ox) {
              const int ix = ox * s.stride - s.pad + kx;
              if (ix >= 0 && ix < s.width) drow[ox] += wv * srow[ix];
            }
          }
        }
      }
    }
  }
}

void conv2d_reference(const Conv2dShape& s, std::span<const double> input, std::span<const double> weight,
                      std::span<const double> bias, std::span<double> output) {
  const int ho = s.out_height(), wo = s.out_width(), k = s.kernel;
  for (int co = 0; co < s.out_channels; ++co)
    for (int oy = 0; oy < ho; ++oy)
      for (int ox = 0; ox < wo; ++ox) {
        double acc = bias.empty() ? 0.0 : bias[co];
        for (int ci = 0; ci < s.in_channels; ++ci)
          for (int ky = 0; ky < k; ++ky)
            for (int kx = 0; kx < k; ++kx) {
              const int iy = oy * s.stride - s.pad + ky, ix = ox * s.stride - s.pad + kx;
              if (iy < 0 || iy >= s.height || ix < 0 || ix >= s.width) continue;
              acc += weight[((static_cast<std::size_t>(co) * s.in_channels + ci) * k + ky) * k + kx] *
                     input[(static_cast<std::size_t>(ci) * s.height + iy) * s.width + ix];
            }
        output[(static_cast<std::size_t>(co) * ho + oy) * wo + ox] = acc;
      }
}

void matmul(std::span<const double> a, std::span<const double> b, std::span<double> c, int m, int k, int n) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) {
    double* crow = c.data() + static_cast<std::size_t>(i) * n;
    std::fill(crow, crow + n, 0.0);
    for (int p = 0; p < k; ++p) {
      const double av = a[static_cast<std::size_t>(i) * k + p];
      const double* brow = b.data() + static_cast<std::size_t>(p) * n;
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void matmul_reference(std::span<const double> a, std::span<const double> b, std::span<double> c, int m, int k,
                      int n) {
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int p = 0; p < k; ++p) acc += a[static_cast<std::size_t>(i) * k + p] * b[static_cast<std::size_t>(p) * n + j];
      c[static_cast<std::size_t>(i) * n + j] = acc;
    }
}

void softmax_rows(std::span<double> logits, int m, int n) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) {
    double* row = logits.data() + static_cast<std::size_t>(i) * n;
    const double mx = *std::max_element(row, row + n);
    double sum = 0.0;
    for (int j = 0; j < n; ++j) {
      row[j] = std::exp(row[j] - mx);
      sum += row[j];
    }
    for (int j = 0; j < n; ++j) row[j] /= sum;
  }
}

}  // namespace shadowbench::kernels
