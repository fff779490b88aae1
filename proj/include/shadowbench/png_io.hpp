#pragma once

#include <filesystem>

#include "shadowbench/imaging.hpp"

namespace shadowbench {

/// Reads an 8- or 16-bit PNG. Gray is promoted to RGB, alpha is dropped,
/// palettes are expanded. Throws IoError with a distinct kind for a missing
/// file, an unsupported bit depth and a corrupt stream.
Image load_image(const std::filesystem::path& path);

/// Writes an 8-bit RGB PNG; channels are quantized as round(v*255) clamped to [0,255].
void save_image(const Image& img, const std::filesystem::path& path);

/// Same as save_image but 16-bit per channel (round(v*65535)).
void save_image16(const Image& img, const std::filesystem::path& path);

/// Reads a PNG as a single-channel field. Color inputs are averaged across channels.
ScalarField load_field(const std::filesystem::path& path, FieldRole role);

/// Writes an 8-bit grayscale PNG.
void save_field(const ScalarField& field, const std::filesystem::path& path);

}  // namespace shadowbench
