#pragma once

#include <array>

#include "shadowbench/imaging.hpp"

namespace shadowbench {

/// 2x3 affine matrix [[a11, a12, tx], [a21, a22, ty]] acting on normalized
/// coordinates in [-1, 1] (pixel centers, x_n = (2x + 1) / W - 1).
struct AffineParams {
  std::array<double, 6> v{1.0, 0.0, 0.0, 0.0, 1.0, 0.0};

  static AffineParams identity() noexcept { return {}; }
  double& operator[](int i) { return v[i]; }
  double operator[](int i) const { return v[i]; }
  bool operator==(const AffineParams&) const = default;
};

/// Output pixel (x, y) samples the input at theta * (x_n, y_n, 1), bilinear,
/// zero outside. Identity theta reproduces the input exactly.
ScalarField affine_warp(const Raster<1>& mask, const AffineParams& theta);


struct WarpGradients {
  std::array<double, 6> d_theta{};
  Plane d_mask;
};

/// Exact derivatives of sum(upstream * affine_warp(mask, theta)) with respect
/// to theta and to the input mask.
WarpGradients warp_gradients(const Raster<1>& mask, const AffineParams& theta, const Plane& upstream);

}  // namespace shadowbench
