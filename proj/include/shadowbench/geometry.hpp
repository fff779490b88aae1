#pragma once

#include <array>

namespace shadowbench {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point2&) const = default;
};

inline constexpr int kLandmarkCount = 68;

/// 68 points in iBUG order, pixel coordinates.
using Landmarks = std::array<Point2, kLandmarkCount>;

/// Outer eye corners in 0-indexed iBUG order.
inline constexpr int kLeftEyeOuter = 36;
inline constexpr int kRightEyeOuter = 45;

/// A canonical frontal 68-point layout scaled to an H x W image.
Landmarks landmark_template(int height, int width);

}  // namespace shadowbench
