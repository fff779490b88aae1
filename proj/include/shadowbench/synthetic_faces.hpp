#pragma once

#include <cstdint>

#include "shadowbench/geometry.hpp"
#include "shadowbench/imaging.hpp"

namespace shadowbench {

/// Procedural frontal face: background, skin ellipse matching
/// synthetic_face_depth, hair, brows, eyes, nose shading and mouth. Tone,
/// lighting and feature jitter are drawn from `seed`.
Image synthetic_face(std::uint64_t seed, int height, int width);

/// The template landmarks shifted by the same jitter synthetic_face uses.
Landmarks synthetic_face_landmarks(std::uint64_t seed, int height, int width);

}  // namespace shadowbench
