#pragma once

#include <array>
#include <memory>

#include "shadowbench/imaging.hpp"
#include "shadowbench/kernels.hpp"

namespace shadowbench {

/// Parameters of the shadow matte renderer.
struct MatteConfig {
  double sigma_min = 0.5;
  double sigma_max = 3.0;
  /// Per-channel blur multipliers (r, g, b); red scatters deepest in skin.
  std::array<double, 3> scatter_spread{1.3, 1.15, 1.0};
  /// Strength of the depth modulation; 0 ignores depth.
  double depth_gain = 0.5;

  /// Throws ConfigError unless 0 <= sigma_min <= sigma_max, spreads >= 1 with
  /// r >= g >= b, and depth_gain >= 0.
  void validate() const;
};

/// beta_c = slope_c * alpha + intercept_c. Zero by default (pure attenuation).
struct BetaMap {
  std::array<double, 3> slope{0.0, 0.0, 0.0};
  std::array<double, 3> intercept{0.0, 0.0, 0.0};

  std::array<double, 3> at(double alpha) const noexcept {
    return {slope[0] * alpha + intercept[0], slope[1] * alpha + intercept[1], slope[2] * alpha + intercept[2]};
  }
};

inline constexpr double kMaxAlpha = 0.999;

constexpr double clamp_alpha(double alpha) noexcept {
  return alpha < 0.0 ? 0.0 : (alpha > kMaxAlpha ? kMaxAlpha : alpha);
}

/// Everything the compositing model needs: ambient attenuation alpha, the
/// beta map, occluder mask M, face depth D and the matte settings.
struct ShadowParams {
  double alpha = 0.8;
  BetaMap beta;
  ScalarField mask;
  ScalarField depth;
  MatteConfig matte;
};

/// Euclidean distance from every pixel to the nearest pixel of the opposite
/// class of (mask >= 0.5). +inf when the opposite class is empty.
Plane boundary_distance(const Raster<1>& mask);

/// Per-pixel blur sigma: sigma_min + (sigma_max - sigma_min) * min(dist / sigma_max, 1).
Plane matte_sigma(const Raster<1>& mask, const MatteConfig& cfg);

/// Depth-aware soft matte rho(D * M) with unit channel spread.
ScalarField render_matte(const ScalarField& mask, const ScalarField& depth, const MatteConfig& cfg);

/// Per-channel mattes, blurred with sigma * scatter_spread[c].
std::array<ScalarField, 3> render_matte_rgb(const ScalarField& mask, const ScalarField& depth,
                                            const MatteConfig& cfg);

/// I = (1 - (1 - alpha) rho) I_clean + alpha beta rho, per channel, clamped to [0,1].
Image compose_shadow(const Image& clean, const ShadowParams& params);

namespace detail {
struct MatteStage;
}

/// Composite plus the partial derivatives of every output pixel.
///
/// d_alpha and d_rho are the diagonal partials dI/dalpha and dI/drho (zero on
/// pixels whose pre-clamp value left [0,1]). The mask derivative is exposed as
/// a vector-Jacobian product because dI/dM is a dense blur operator: it
/// applies the transpose of the fixed-sigma blur, then the clamp and depth
/// product. The sigma field counts as constant (it is piecewise constant in M).
class ShadowJacobian {
 public:
  Image image;
  std::array<ScalarField, 3> matte;
  PixelArray d_alpha;
  PixelArray d_rho;

  /// sum_p,c upstream * dI/dalpha
  double vjp_alpha(const PixelArray& upstream) const;
  /// upstream^T dI/dM
  Plane vjp_mask(const PixelArray& upstream) const;

 private:
  friend ShadowJacobian synth_gradients(const Image&, const ShadowParams&);
  std::shared_ptr<const detail::MatteStage> stage_;
};

ShadowJacobian synth_gradients(const Image& clean, const ShadowParams& params);

/// Ellipsoidal face-depth proxy: sqrt(1 - ((x-cx)/rx)^2 - ((y-cy)/ry)^2), clamped,
/// rx = 0.38 W, ry = 0.48 H, centered at (W/2, H/2) in integer pixel coordinates.
ScalarField synthetic_face_depth(int height, int width);

/// The same dome evaluated at a continuous position.
double face_depth_at(double x, double y, int height, int width) noexcept;

}  // namespace shadowbench
