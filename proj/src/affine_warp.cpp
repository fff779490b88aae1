#include "shadowbench/affine_warp.hpp"

#include <cmath>

namespace shadowbench {
namespace {

struct Sample {
  double xs, ys;  // source position, pixel units
  double xn, yn;  // normalized output position
};

// x_s = x + W/2 * ((a11 - 1) x_n + a12 y_n + tx); written as an offset so the
// identity maps every pixel onto itself without rounding.
Sample source_of(const AffineParams& t, int x, int y, int height, int width) {
  const double xn = (2.0 * x + 1.0) / width - 1.0;
  const double yn = (2.0 * y + 1.0) / height - 1.0;
  const double ox = (t[0] - 1.0) * xn + t[1] * yn + t[2];
  const double oy = t[3] * xn + (t[4] - 1.0) * yn + t[5];
  return {x + 0.5 * width * ox, y + 0.5 * height * oy, xn, yn};
}

double pixel_or_zero(const Raster<1>& m, int y, int x) {
  return (y < 0 || y >= m.height() || x < 0 || x >= m.width()) ? 0.0 : m.at(y, x);
}

}  // namespace

ScalarField affine_warp(const Raster<1>& mask, const AffineParams& theta) {
  const int h = mask.height(), w = mask.width();
  ScalarField out(h, w, 0.0, FieldRole::mask);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const Sample s = source_of(theta, x, y, h, w);
      const double fx = std::floor(s.xs), fy = std::floor(s.ys);
      const int x0 = static_cast<int>(fx), y0 = static_cast<int>(fy);
      const double tx = s.xs - fx, ty = s.ys - fy;
      double v = (1.0 - ty) * (1.0 - tx) * pixel_or_zero(mask, y0, x0);
      if (tx != 0.0) v += (1.0 - ty) * tx * pixel_or_zero(mask, y0, x0 + 1);
      if (ty != 0.0) {
        v += ty * (1.0 - tx) * pixel_or_zero(mask, y0 + 1, x0);
        if (tx != 0.0) v += ty * tx * pixel_or_zero(mask, y0 + 1, x0 + 1);
      }
      out.at(y, x) = v;
    }
  return out;
}

WarpGradients warp_gradients(const Raster<1>& mask, const AffineParams& theta, const Plane& upstream) {
  require_same_extent(mask, upstream, "warp_gradients");
  const int h = mask.height(), w = mask.width();
  WarpGradients g;
  g.d_mask = Plane(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double u = upstream.at(y, x);
      if (u == 0.0) continue;
      const Sample s = source_of(theta, x, y, h, w);
      const double fx = std::floor(s.xs), fy = std::floor(s.ys);
      const int x0 = static_cast<int>(fx), y0 = static_cast<int>(fy);
      const double tx = s.xs - fx, ty = s.ys - fy;
      const double m00 = pixel_or_zero(mask, y0, x0), m01 = pixel_or_zero(mask, y0, x0 + 1);
      const double m10 = pixel_or_zero(mask, y0 + 1, x0), m11 = pixel_or_zero(mask, y0 + 1, x0 + 1);
      const double dvdx = (1.0 - ty) * (m01 - m00) + ty * (m11 - m10);
      const double dvdy = (1.0 - tx) * (m10 - m00) + tx * (m11 - m01);
      const double gx = u * dvdx * 0.5 * w, gy = u * dvdy * 0.5 * h;
      g.d_theta[0] += gx * s.xn;
      g.d_theta[1] += gx * s.yn;
      g.d_theta[2] += gx;
      g.d_theta[3] += gy * s.xn;
      g.d_theta[4] += gy * s.yn;
      g.d_theta[5] += gy;
      auto scatter = [&](int yy, int xx, double wgt) {
        if (yy >= 0 && yy < h && xx >= 0 && xx < w) g.d_mask.at(yy, xx) += u * wgt;
      };
      scatter(y0, x0, (1.0 - ty) * (1.0 - tx));
      scatter(y0, x0 + 1, (1.0 - ty) * tx);
      scatter(y0 + 1, x0, ty * (1.0 - tx));
      scatter(y0 + 1, x0 + 1, ty * tx);
    }
  return g;
}

}  // namespace shadowbench
