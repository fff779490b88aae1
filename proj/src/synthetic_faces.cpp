#include "shadowbench/synthetic_faces.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "shadowbench/errors.hpp"
#include "shadowbench/rng.hpp"

namespace shadowbench {
namespace {

// Normalized (x, y) in [0, 1]^2 of the non-jaw points 17..67.
constexpr double kInner[][2] = {
    // brows
    {0.20, 0.34}, {0.25, 0.31}, {0.31, 0.30}, {0.37, 0.31}, {0.43, 0.33},
    {0.57, 0.33}, {0.63, 0.31}, {0.69, 0.30}, {0.75, 0.31}, {0.80, 0.34},
    // nose
    {0.50, 0.40}, {0.50, 0.46}, {0.50, 0.52}, {0.50, 0.58},
    {0.43, 0.61}, {0.46, 0.62}, {0.50, 0.63}, {0.54, 0.62}, {0.57, 0.61},
    // eyes
    {0.26, 0.42}, {0.30, 0.40}, {0.36, 0.40}, {0.40, 0.42}, {0.36, 0.44}, {0.30, 0.44},
    {0.60, 0.42}, {0.64, 0.40}, {0.70, 0.40}, {0.74, 0.42}, {0.70, 0.44}, {0.64, 0.44},
    // outer lips
    {0.37, 0.75}, {0.41, 0.72}, {0.46, 0.705}, {0.50, 0.71}, {0.54, 0.705}, {0.59, 0.72},
    {0.63, 0.75}, {0.59, 0.78}, {0.54, 0.80}, {0.50, 0.805}, {0.46, 0.80}, {0.41, 0.78},
    // inner lips
    {0.40, 0.75}, {0.45, 0.74}, {0.50, 0.74}, {0.55, 0.74},
    {0.60, 0.75}, {0.55, 0.76}, {0.50, 0.76}, {0.45, 0.76},
};

static_assert(std::size(kInner) == kLandmarkCount - 17);

struct Jitter {
  double dx = 0.0;  // normalized shifts of the inner features
  double dy = 0.0;
};

Jitter face_jitter(std::uint64_t seed) {
  Rng rng(derive_seed(seed, 1));
  Jitter j;
  j.dx = rng.uniform(-0.02, 0.02);
  j.dy = rng.uniform(-0.02, 0.02);
  return j;
}

double smoothstep(double e0, double e1, double v) {
  const double t = std::clamp((v - e0) / (e1 - e0), 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

double segment_distance(double px, double py, Point2 a, Point2 b) {
  const double vx = b.x - a.x, vy = b.y - a.y;
  const double len2 = vx * vx + vy * vy;
  const double t = len2 > 0.0 ? std::clamp(((px - a.x) * vx + (py - a.y) * vy) / len2, 0.0, 1.0) : 0.0;
  return std::hypot(px - (a.x + t * vx), py - (a.y + t * vy));
}

void blend(double* px, const double* color, double w) {
  for (int c = 0; c < 3; ++c) px[c] = px[c] * (1.0 - w) + color[c] * w;
}

}  // namespace

Landmarks landmark_template(int height, int width) {
  if (height < 1 || width < 1) throw DomainError("landmark_template: empty image");
  Landmarks l;
  for (int k = 0; k <= 16; ++k) {
    const double phi = k * std::numbers::pi / 16.0;
    l[k] = {(0.5 - 0.40 * std::cos(phi)) * width, (0.42 + 0.50 * std::sin(phi)) * height};
  }
  for (int k = 17; k < kLandmarkCount; ++k) l[k] = {kInner[k - 17][0] * width, kInner[k - 17][1] * height};
  return l;
}

Landmarks synthetic_face_landmarks(std::uint64_t seed, int height, int width) {
  Landmarks l = landmark_template(height, width);
  const Jitter j = face_jitter(seed);
  for (int k = 17; k < kLandmarkCount; ++k) {
    l[k].x += j.dx * width;
    l[k].y += j.dy * height;
  }
  return l;
}

Image synthetic_face(std::uint64_t seed, int height, int width) {
  if (height < 8 || width < 8) throw DomainError("synthetic_face: image must be at least 8x8");
  Rng rng(derive_seed(seed, 0));
  const double tone = rng.uniform(0.35, 0.85);
  const double skin[3] = {tone, tone * rng.uniform(0.70, 0.80), tone * rng.uniform(0.55, 0.68)};
  const double bg[3] = {rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9)};
  const double hair_v = rng.uniform(0.05, 0.35);
  const double hair[3] = {hair_v, hair_v * 0.8, hair_v * 0.6};
  const double lip[3] = {std::min(1.0, tone * 1.05), tone * 0.45, tone * 0.45};
  const double iris[3] = {rng.uniform(0.05, 0.3), rng.uniform(0.05, 0.3), rng.uniform(0.05, 0.3)};
  const double white[3] = {0.92, 0.92, 0.90};
  const double light = rng.uniform(-0.25, 0.25);

  const Landmarks lm = synthetic_face_landmarks(seed, height, width);
  const double cx = width / 2, cy = 0.5 * height;
  const double rx = 0.38 * width, ry = 0.48 * height;
  const double aa = 1.0 / std::max(1.0, 0.02 * std::min(height, width));
  const double line_w = std::max(0.6, 0.012 * width);

  Image img(height, width);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      double px[3];
      const double gy = static_cast<double>(y) / height;
      for (int c = 0; c < 3; ++c) px[c] = bg[c] * (0.85 + 0.3 * gy);
      const double ex = (x - cx) / rx, ey = (y - cy) / ry;
      const double r = std::sqrt(ex * ex + ey * ey);
      const double inside = 1.0 - smoothstep(1.0 - aa, 1.0 + aa, r);
      if (inside > 0.0) {
        const double shade = std::clamp(1.0 + light * ex - 0.25 * r * r, 0.3, 1.2);
        double s[3];
        for (int c = 0; c < 3; ++c) s[c] = std::min(1.0, skin[c] * shade);
        blend(px, s, inside);
      }
      // hair cap
      if (y < cy && r > 0.72) blend(px, hair, inside * smoothstep(0.72, 0.9, r) * smoothstep(0.1, 0.6, -ey));

      const double fx = x + 0.5, fy = y + 0.5;
      auto polyline = [&](int from, int to, bool closed, const double* color, double width_px, double strength) {
        double d = 1e9;
        for (int k = from; k < to; ++k) d = std::min(d, segment_distance(fx, fy, lm[k], lm[k + 1]));
        if (closed) d = std::min(d, segment_distance(fx, fy, lm[to], lm[from]));
        const double w = 1.0 - smoothstep(width_px, width_px + 1.0, d);
        if (w > 0.0) blend(px, color, w * strength);
      };
      polyline(17, 21, false, hair, line_w * 1.5, 0.9);
      polyline(22, 26, false, hair, line_w * 1.5, 0.9);
      for (int e : {36, 42}) {
        const Point2 c{(lm[e].x + lm[e + 3].x) / 2, (lm[e].y + lm[e + 3].y) / 2};
        const double half_w = std::abs(lm[e + 3].x - lm[e].x) / 2;
        const double half_h = std::max(1.0, 0.025 * height);
        const double er = std::hypot((fx - c.x) / half_w, (fy - c.y) / half_h);
        blend(px, white, 1.0 - smoothstep(0.9, 1.1, er));
        const double ir = std::hypot(fx - c.x, fy - c.y) / (0.9 * half_h);
        blend(px, iris, (1.0 - smoothstep(0.8, 1.2, ir)) * (1.0 - smoothstep(0.9, 1.1, er)));
      }
      double shadow[3];
      for (int c = 0; c < 3; ++c) shadow[c] = skin[c] * 0.6;
      polyline(27, 30, false, shadow, line_w, 0.35);
      polyline(31, 35, false, shadow, line_w, 0.6);
      polyline(48, 59, true, lip, line_w * 1.8, 0.95);
      polyline(60, 67, true, shadow, line_w * 0.8, 0.8);
      for (int c = 0; c < 3; ++c) img.at(y, x, c) = std::clamp(px[c], 0.0, 1.0);
    }
  return img;
}

}  // namespace shadowbench
