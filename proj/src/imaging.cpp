#include "shadowbench/imaging.hpp"

#include <cmath>

namespace shadowbench {

Image::Image(int height, int width, double fill) : Raster<3>(height, width, fill) {}

Image::Image(Raster<3> pixels) : Raster<3>(std::move(pixels)) {}

bool Image::is_valid() const noexcept {
  if (height() < 1 || width() < 1) return false;
  for (double v : values())
    if (!(v >= 0.0 && v <= 1.0)) return false;
  return true;
}

Image Image::clamped() const {
  Image out(*this);
  for (double& v : out.values()) v = std::clamp(v, 0.0, 1.0);
  return out;
}

ScalarField::ScalarField(int height, int width, double fill, FieldRole role)
    : Raster<1>(height, width, fill), role_(role) {}

ScalarField::ScalarField(Raster<1> values, FieldRole role) : Raster<1>(std::move(values)), role_(role) {}

bool ScalarField::is_valid() const noexcept {
  if (height() < 1 || width() < 1) return false;
  for (double v : values())
    if (!(v >= 0.0 && v <= 1.0)) return false;
  return true;
}

ScalarField ScalarField::clamped() const {
  ScalarField out(*this);
  for (double& v : out.values()) v = std::clamp(v, 0.0, 1.0);
  return out;
}

std::size_t ScalarField::foreground_count() const noexcept {
  std::size_t n = 0;
  for (double v : values()) n += v >= 0.5 ? 1 : 0;
  return n;
}

namespace {

// sRGB primaries to XYZ, D65.
constexpr double kRgbToXyz[3][3] = {
    {0.4124564, 0.3575761, 0.1804375},
    {0.2126729, 0.7151522, 0.0721750},
    {0.0193339, 0.1191920, 0.9503041},
};
constexpr double kXyzToRgb[3][3] = {
    {3.2404542, -1.5371385, -0.4985314},
    {-0.9692660, 1.8760108, 0.0415560},
    {0.0556434, -0.2040259, 1.0572252},
};
// White point as the image of RGB (1,1,1) so that white lands on a = b = 0.
constexpr double kWhite[3] = {
    kRgbToXyz[0][0] + kRgbToXyz[0][1] + kRgbToXyz[0][2],
    kRgbToXyz[1][0] + kRgbToXyz[1][1] + kRgbToXyz[1][2],
    kRgbToXyz[2][0] + kRgbToXyz[2][1] + kRgbToXyz[2][2],
};

constexpr double kDelta = 6.0 / 29.0;

double srgb_decode(double c) { return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4); }

double srgb_encode(double c) {
  return c <= 0.0031308 ? 12.92 * c : 1.055 * std::pow(c, 1.0 / 2.4) - 0.055;
}

double lab_f(double t) {
  return t > kDelta * kDelta * kDelta ? std::cbrt(t) : t / (3.0 * kDelta * kDelta) + 4.0 / 29.0;
}

double lab_f_inv(double t) { return t > kDelta ? t * t * t : 3.0 * kDelta * kDelta * (t - 4.0 / 29.0); }

}  // namespace

Lab srgb_to_lab(double r, double g, double b) noexcept {
  const double lin[3] = {srgb_decode(r), srgb_decode(g), srgb_decode(b)};
  double xyz[3];
  for (int i = 0; i < 3; ++i)
    xyz[i] = (kRgbToXyz[i][0] * lin[0] + kRgbToXyz[i][1] * lin[1] + kRgbToXyz[i][2] * lin[2]) / kWhite[i];
  const double fx = lab_f(xyz[0]), fy = lab_f(xyz[1]), fz = lab_f(xyz[2]);
  return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

std::array<double, 3> lab_to_srgb(const Lab& lab) noexcept {
  const double fy = (lab.l + 16.0) / 116.0;
  const double fx = fy + lab.a / 500.0;
  const double fz = fy - lab.b / 200.0;
  const double xyz[3] = {lab_f_inv(fx) * kWhite[0], lab_f_inv(fy) * kWhite[1], lab_f_inv(fz) * kWhite[2]};
  std::array<double, 3> rgb{};
  for (int i = 0; i < 3; ++i) {
    const double lin = kXyzToRgb[i][0] * xyz[0] + kXyzToRgb[i][1] * xyz[1] + kXyzToRgb[i][2] * xyz[2];
    rgb[i] = srgb_encode(std::max(lin, 0.0));
  }
  return rgb;
}

LabImage rgb_to_lab(const Image& img) {
  LabImage out(img.height(), img.width());
  const std::size_t n = img.pixels();
  for (std::size_t i = 0; i < n; ++i) {
    const Lab lab = srgb_to_lab(img[3 * i], img[3 * i + 1], img[3 * i + 2]);
    out[3 * i] = lab.l;
    out[3 * i + 1] = lab.a;
    out[3 * i + 2] = lab.b;
  }
  return out;
}

Image lab_to_rgb(const LabImage& lab) {
  Image out(lab.height(), lab.width());
  const std::size_t n = lab.pixels();
  for (std::size_t i = 0; i < n; ++i) {
    const auto rgb = lab_to_srgb({lab[3 * i], lab[3 * i + 1], lab[3 * i + 2]});
    for (int c = 0; c < 3; ++c) out[3 * i + c] = std::clamp(rgb[c], 0.0, 1.0);
  }
  return out;
}

}  // namespace shadowbench
