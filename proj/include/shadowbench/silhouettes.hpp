#pragma once

#include <filesystem>
#include <vector>

#include "shadowbench/factor_bench.hpp"

namespace shadowbench {

/// Twelve procedurally rasterized occluder shapes (disk, ellipse, squircle,
/// triangle, star5, star8, gear, hand, leaf, crescent, cross, heart), each a
/// single 8-connected component on a size x size canvas.
std::vector<NamedMask> starter_silhouettes(int size = 96);

/// Loads `<dir>/<id>.png` for every PNG in the directory, sorted by id.
std::vector<NamedMask> load_silhouette_dir(const std::filesystem::path& dir);

void write_silhouette_dir(const std::vector<NamedMask>& library, const std::filesystem::path& dir);

}  // namespace shadowbench
