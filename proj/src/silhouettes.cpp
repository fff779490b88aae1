#include "shadowbench/silhouettes.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include "shadowbench/png_io.hpp"

namespace shadowbench {
namespace {

using Inside = std::function<bool(double u, double v)>;

ScalarField rasterize(int size, const Inside& inside) {
  ScalarField m(size, size, 0.0, FieldRole::mask);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      const double u = (2.0 * x + 1.0) / size - 1.0;
      const double v = (2.0 * y + 1.0) / size - 1.0;
      m.at(y, x) = inside(u, v) ? 1.0 : 0.0;
    }
  return m;
}

Inside polar(std::function<double(double)> radius) {
  return [radius = std::move(radius)](double u, double v) {
    return std::hypot(u, v) <= radius(std::atan2(v, u));
  };
}

bool in_triangle(double u, double v) {
  // Apex up, base at v = 0.6.
  const double ax = 0.0, ay = -0.75, bx = -0.8, by = 0.6, cx = 0.8, cy = 0.6;
  auto side = [](double px, double py, double qx, double qy, double rx, double ry) {
    return (qx - px) * (ry - py) - (qy - py) * (rx - px);
  };
  const double d1 = side(ax, ay, bx, by, u, v), d2 = side(bx, by, cx, cy, u, v), d3 = side(cx, cy, ax, ay, u, v);
  return !((d1 < 0 || d2 < 0 || d3 < 0) && (d1 > 0 || d2 > 0 || d3 > 0));
}

bool in_hand(double u, double v) {
  const double pu = u / 0.5, pv = (v - 0.35) / 0.45;
  if (pu * pu + pv * pv <= 1.0) return true;
  // four fingers and a thumb, all rooted in the palm
  const double tops[4] = {-0.55, -0.8, -0.75, -0.5};
  for (int f = 0; f < 4; ++f) {
    const double cx = -0.33 + 0.22 * f;
    if (std::abs(u - cx) <= 0.08 && v >= tops[f] && v <= 0.2) return true;
  }
  const double tu = u + 0.55 - 0.45 * (v - 0.1), tv = v - 0.1;
  return std::abs(tu) <= 0.09 && tv >= -0.35 && tv <= 0.3 && u <= -0.2;
}

bool in_leaf(double u, double v) {
  const double half = 0.42 * (1.0 - (u / 0.8) * (u / 0.8));
  if (std::abs(u) <= 0.8 && std::abs(v - 0.1 * u) <= half) return true;
  return u >= 0.75 && u <= 0.95 && std::abs(v - 0.08) <= 0.04;  // stem
}

bool in_heart(double u, double v) {
  const double x = u / 0.75, y = -(v + 0.05) / 0.75;
  const double a = x * x + y * y - 1.0;
  return a * a * a - x * x * y * y * y <= 0.0;
}

}  // namespace

std::vector<NamedMask> starter_silhouettes(int size) {
  using std::numbers::pi;
  std::vector<NamedMask> lib;
  auto add = [&](const char* id, const Inside& f) { lib.push_back({id, rasterize(size, f)}); };
  add("crescent", [](double u, double v) {
    return u * u + v * v <= 0.8 * 0.8 && (u - 0.38) * (u - 0.38) + (v + 0.1) * (v + 0.1) > 0.6 * 0.6;
  });
  add("cross", [](double u, double v) {
    return (std::abs(u) <= 0.22 && std::abs(v) <= 0.8) || (std::abs(v) <= 0.22 && std::abs(u) <= 0.8);
  });
  add("disk", [](double u, double v) { return u * u + v * v <= 0.8 * 0.8; });
  add("ellipse", [](double u, double v) { return (u / 0.85) * (u / 0.85) + (v / 0.5) * (v / 0.5) <= 1.0; });
  add("gear", polar([](double t) { return 0.62 + 0.14 * (std::sin(12.0 * t) >= 0.0 ? 1.0 : -1.0); }));
  add("hand", in_hand);
  add("heart", in_heart);
  add("leaf", in_leaf);
  add("squircle", [](double u, double v) { return std::pow(u, 4) + std::pow(v, 4) <= std::pow(0.75, 4); });
  add("star5", polar([](double t) { return 0.55 + 0.25 * std::cos(5.0 * t + pi / 2.0); }));
  add("star8", polar([](double t) { return 0.35 + 0.5 * std::pow(0.5 + 0.5 * std::cos(8.0 * t), 4.0); }));
  add("triangle", in_triangle);
  return lib;
}

std::vector<NamedMask> load_silhouette_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec))
    throw IoError(IoErrorKind::missing_file, "silhouette directory not found: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".png") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<NamedMask> lib;
  for (const auto& f : files) lib.push_back({f.stem().string(), load_field(f, FieldRole::mask)});
  return lib;
}

void write_silhouette_dir(const std::vector<NamedMask>& library, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& m : library) save_field(m.mask, dir / (m.id + ".png"));
}

}  // namespace shadowbench
