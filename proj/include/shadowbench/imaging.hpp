#pragma once

#include <array>

#include "shadowbench/raster.hpp"

namespace shadowbench {

/// RGB image, channels in [0,1], treated as sRGB (D65).
class Image : public Raster<3> {
 public:
  Image() = default;
  Image(int height, int width, double fill = 0.0);
  explicit Image(Raster<3> pixels);

  /// All channels in [0,1] and both dimensions >= 1.
  bool is_valid() const noexcept;
  /// Copy with every channel clamped to [0,1].
  Image clamped() const;
};

enum class FieldRole { mask, depth, matte };

/// Single-channel field with values in [0,1].
class ScalarField : public Raster<1> {
 public:
  ScalarField() = default;
  ScalarField(int height, int width, double fill = 0.0, FieldRole role = FieldRole::mask);
  ScalarField(Raster<1> values, FieldRole role);

  FieldRole role() const noexcept { return role_; }
  void set_role(FieldRole role) noexcept { role_ = role; }
  bool is_valid() const noexcept;
  ScalarField clamped() const;
  /// Number of pixels with value >= 0.5.
  std::size_t foreground_count() const noexcept;

 private:
  FieldRole role_ = FieldRole::mask;
};

struct Lab {
  double l = 0.0;
  double a = 0.0;
  double b = 0.0;
};

/// Per-pixel CIELAB image. Only rgb_to_lab produces one.
class LabImage : public Raster<3> {
 public:
  Lab lab(int y, int x) const { return {at(y, x, 0), at(y, x, 1), at(y, x, 2)}; }

 private:
  LabImage(int height, int width) : Raster<3>(height, width) {}
  friend LabImage rgb_to_lab(const Image& img);
};

Lab srgb_to_lab(double r, double g, double b) noexcept;
std::array<double, 3> lab_to_srgb(const Lab& lab) noexcept;

LabImage rgb_to_lab(const Image& img);
/// Inverse pipeline; result is clamped into gamut.
Image lab_to_rgb(const LabImage& lab);

/// Squared CIE76 distance.
inline double lab_distance_sq(const Lab& p, const Lab& q) noexcept {
  const double dl = p.l - q.l, da = p.a - q.a, db = p.b - q.b;
  return dl * dl + da * da + db * db;
}

}  // namespace shadowbench
