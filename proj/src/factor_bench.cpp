#include "shadowbench/factor_bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace shadowbench {

const char* factor_name(Factor f) noexcept {
  switch (f) {
    case Factor::intensity: return "intensity";
    case Factor::size: return "size";
    case Factor::shape: return "shape";
    case Factor::location: return "location";
  }
  return "?";
}

int FactorSpec::severity(Factor f) const noexcept {
  switch (f) {
    case Factor::intensity: return intensity_severity;
    case Factor::size: return size_severity;
    case Factor::shape: return shape_severity;
    case Factor::location: return location_severity;
  }
  return 0;
}

void check_severity(int severity) {
  if (severity < 1 || severity > 3) throw DomainError("severity must be 1, 2 or 3, got " + std::to_string(severity));
}

Interval intensity_range(int severity) {
  check_severity(severity);
  static constexpr Interval ranges[3] = {{0.8, 1.0}, {0.4, 0.6}, {0.0, 0.2}};
  return ranges[severity - 1];
}

Interval area_range(int severity) {
  check_severity(severity);
  static constexpr Interval ranges[3] = {{0.10, 0.20}, {0.45, 0.55}, {0.80, 0.90}};
  return ranges[severity - 1];
}

Point2 location_target(int severity, int height, int width) {
  check_severity(severity);
  const double ys[3] = {height / 6.0, height / 2.0, 5.0 * height / 6.0};
  return {width / 2.0, ys[severity - 1]};
}

double sample_intensity(int severity, Rng& rng) {
  const Interval r = intensity_range(severity);
  // The top of the light range is capped by the model's alpha clamp.
  return std::min(rng.uniform(r.lo, r.hi), kMaxAlpha);
}

// ---------------------------------------------------------------------------
// shape complexity

namespace {

constexpr int kDx[8] = {1, 1, 0, -1, -1, -1, 0, 1};
constexpr int kDy[8] = {0, 1, 1, 1, 0, -1, -1, -1};

struct Binary {
  int h = 0, w = 0;
  std::vector<unsigned char> v;
  bool at(int y, int x) const { return y >= 0 && y < h && x >= 0 && x < w && v[static_cast<std::size_t>(y) * w + x]; }
};

Binary threshold(const Raster<1>& mask) {
  Binary b{mask.height(), mask.width(), std::vector<unsigned char>(mask.size())};
  for (std::size_t i = 0; i < mask.size(); ++i) b.v[i] = mask[i] >= 0.5;
  return b;
}

int count_components(const Binary& b) {
  std::vector<unsigned char> seen(b.v.size(), 0);
  std::vector<std::pair<int, int>> stack;
  int components = 0;
  for (int y = 0; y < b.h; ++y)
    for (int x = 0; x < b.w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * b.w + x;
      if (!b.v[i] || seen[i]) continue;
      ++components;
      seen[i] = 1;
      stack.emplace_back(y, x);
      while (!stack.empty()) {
        const auto [cy, cx] = stack.back();
        stack.pop_back();
        for (int d = 0; d < 8; ++d) {
          const int ny = cy + kDy[d], nx = cx + kDx[d];
          if (!b.at(ny, nx)) continue;
          const std::size_t j = static_cast<std::size_t>(ny) * b.w + nx;
          if (seen[j]) continue;
          seen[j] = 1;
          stack.emplace_back(ny, nx);
        }
      }
    }
  return components;
}

std::vector<Point2> moore_trace(const Binary& b) {
  int sy = -1, sx = -1;
  for (int y = 0; y < b.h && sy < 0; ++y)
    for (int x = 0; x < b.w; ++x)
      if (b.at(y, x)) {
        sy = y;
        sx = x;
        break;
      }
  std::vector<Point2> contour;
  if (sy < 0) return contour;

  // Radial sweep, clockwise. The start pixel was entered from the west.
  auto sweep = [&](int y, int x, int back) -> int {
    for (int k = 1; k <= 8; ++k) {
      const int d = (back + k) % 8;
      if (b.at(y + kDy[d], x + kDx[d])) return d;
    }
    return -1;
  };
  contour.push_back({static_cast<double>(sx), static_cast<double>(sy)});
  const int first = sweep(sy, sx, 4);
  if (first < 0) return contour;
  int y = sy + kDy[first], x = sx + kDx[first];
  int dir = first;
  const std::size_t limit = 4 * b.v.size() + 8;
  while (contour.size() < limit) {
    const int next = sweep(y, x, (dir + 4) % 8);
    if (y == sy && x == sx && next == first) break;
    contour.push_back({static_cast<double>(x), static_cast<double>(y)});
    y += kDy[next];
    x += kDx[next];
    dir = next;
  }
  return contour;
}

std::vector<Point2> resample_closed(const std::vector<Point2>& pts, int samples) {
  const std::size_t n = pts.size();
  std::vector<double> cum(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const Point2& a = pts[i];
    const Point2& b = pts[(i + 1) % n];
    cum[i + 1] = cum[i] + std::hypot(b.x - a.x, b.y - a.y);
  }
  const double total = cum[n];
  std::vector<Point2> out(samples);
  std::size_t seg = 0;
  for (int k = 0; k < samples; ++k) {
    const double s = total * k / samples;
    while (seg + 1 < n && cum[seg + 1] <= s) ++seg;
    const double len = cum[seg + 1] - cum[seg];
    const double t = len > 0.0 ? (s - cum[seg]) / len : 0.0;
    const Point2& a = pts[seg];
    const Point2& b = pts[(seg + 1) % n];
    out[k] = {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
  }
  return out;
}

}  // namespace

std::optional<Point2> foreground_centroid(const Raster<1>& mask) {
  double sx = 0.0, sy = 0.0;
  std::size_t n = 0;
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x)
      if (mask.at(y, x) >= 0.5) {
        sx += x;
        sy += y;
        ++n;
      }
  if (n == 0) return std::nullopt;
  return Point2{sx / n, sy / n};
}

std::vector<Point2> trace_outer_contour(const Raster<1>& mask) {
  const Binary b = threshold(mask);
  const int comps = count_components(b);
  if (comps == 0) throw DomainError("shape_complexity: empty mask");
  if (comps > 1) throw DomainError("shape_complexity: mask has " + std::to_string(comps) + " components");
  return moore_trace(b);
}

double shape_complexity(const Raster<1>& mask) {
  const auto contour = trace_outer_contour(mask);
  const Point2 c = *foreground_centroid(mask);
  if (contour.size() < 3) return 0.0;
  const auto pts = resample_closed(contour, kContourSamples);
  std::vector<double> d(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) d[i] = std::hypot(pts[i].x - c.x, pts[i].y - c.y);
  double mean = 0.0;
  for (double v : d) mean += v;
  mean /= d.size();
  if (mean <= 0.0) return 0.0;
  for (double& v : d) v /= mean;
  double var = 0.0;
  for (double v : d) var += (v - 1.0) * (v - 1.0);
  const double cv = std::sqrt(var / d.size());
  const std::size_t n = d.size();
  double rough = 0.0;
  for (std::size_t i = 0; i < n; ++i) rough += std::abs(d[(i + 1) % n] - 2.0 * d[i] + d[(i + n - 1) % n]);
  rough /= n;
  return 0.5 * cv + 0.5 * rough;
}

std::array<std::size_t, 3> tercile_sizes(std::size_t n) noexcept {
  const std::size_t base = n / 3, rem = n % 3;
  return {base + (rem > 0), base + (rem > 1), base};
}

std::vector<SilhouetteEntry> bin_silhouettes(std::vector<NamedMask> library) {
  if (library.empty()) throw DomainError("bin_silhouettes: empty library");
  std::vector<SilhouetteEntry> entries;
  entries.reserve(library.size());
  for (auto& m : library) {
    const double e = shape_complexity(m.mask);
    entries.push_back({std::move(m.id), std::move(m.mask), e, 0});
  }
  std::sort(entries.begin(), entries.end(), [](const SilhouetteEntry& a, const SilhouetteEntry& b) {
    return a.complexity != b.complexity ? a.complexity < b.complexity : a.id < b.id;
  });
  const auto sizes = tercile_sizes(entries.size());
  std::size_t i = 0;
  for (int bin = 0; bin < 3; ++bin)
    for (std::size_t k = 0; k < sizes[bin]; ++k) entries[i++].severity_bin = bin + 1;
  return entries;
}

// ---------------------------------------------------------------------------
// scaling and placement

std::size_t ScaledMask::foreground() const noexcept {
  std::size_t n = 0;
  for (double v : field.values()) n += v >= 0.5;
  return n;
}

Point2 ScaledMask::centroid() const {
  const auto c = foreground_centroid(field);
  if (!c) throw DomainError("scaled mask is empty");
  return {c->x + origin_x, c->y + origin_y};
}

double ScaledMask::area_fraction(int height, int width) const noexcept {
  return static_cast<double>(foreground()) / (static_cast<double>(height) * width);
}

ScaledMask::Canvas ScaledMask::to_canvas(int height, int width) const {
  Canvas out{ScalarField(height, width, 0.0, FieldRole::mask), 0.0};
  std::size_t total = 0, inside = 0;
  for (int y = 0; y < field.height(); ++y)
    for (int x = 0; x < field.width(); ++x) {
      if (field.at(y, x) < 0.5) continue;
      ++total;
      const int cy = y + origin_y, cx = x + origin_x;
      if (cy < 0 || cy >= height || cx < 0 || cx >= width) continue;
      out.mask.at(cy, cx) = 1.0;
      ++inside;
    }
  out.clip_fraction = total == 0 ? 0.0 : 1.0 - static_cast<double>(inside) / total;
  return out;
}

namespace {

double bilinear(const Raster<1>& m, double x, double y) {
  const double fx = std::floor(x), fy = std::floor(y);
  const int x0 = static_cast<int>(fx), y0 = static_cast<int>(fy);
  const double tx = x - fx, ty = y - fy;
  auto px = [&](int yy, int xx) {
    return (yy < 0 || yy >= m.height() || xx < 0 || xx >= m.width()) ? 0.0 : m.at(yy, xx);
  };
  return (1 - ty) * ((1 - tx) * px(y0, x0) + tx * px(y0, x0 + 1)) + ty * ((1 - tx) * px(y0 + 1, x0) + tx * px(y0 + 1, x0 + 1));
}

struct SourceShape {
  const Raster<1>* mask;
  Point2 centroid;
  int x0, y0, x1, y1;  // foreground bounding box
};

SourceShape describe(const Raster<1>& mask) {
  const auto c = foreground_centroid(mask);
  if (!c) throw DomainError("rescale_mask_to_area: empty mask");
  SourceShape s{&mask, *c, mask.width(), mask.height(), -1, -1};
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x)
      if (mask.at(y, x) >= 0.5) {
        s.x0 = std::min(s.x0, x);
        s.y0 = std::min(s.y0, y);
        s.x1 = std::max(s.x1, x);
        s.y1 = std::max(s.y1, y);
      }
  return s;
}

// Source centroid maps to the canvas center (W/2, H/2).
ScaledMask render_scaled(const SourceShape& src, double scale, int height, int width) {
  const double cx = width / 2.0, cy = height / 2.0;
  const int gx0 = static_cast<int>(std::floor(cx + (src.x0 - 1 - src.centroid.x) * scale));
  const int gx1 = static_cast<int>(std::ceil(cx + (src.x1 + 1 - src.centroid.x) * scale));
  const int gy0 = static_cast<int>(std::floor(cy + (src.y0 - 1 - src.centroid.y) * scale));
  const int gy1 = static_cast<int>(std::ceil(cy + (src.y1 + 1 - src.centroid.y) * scale));
  ScaledMask out;
  out.scale = scale;
  out.origin_x = gx0;
  out.origin_y = gy0;
  out.field = Plane(gy1 - gy0 + 1, gx1 - gx0 + 1);
  for (int y = gy0; y <= gy1; ++y) {
    const double sy = src.centroid.y + (y - cy) / scale;
    for (int x = gx0; x <= gx1; ++x) {
      const double sx = src.centroid.x + (x - cx) / scale;
      out.field.at(y - gy0, x - gx0) = bilinear(*src.mask, sx, sy) >= 0.5 ? 1.0 : 0.0;
    }
  }
  return out;
}

}  // namespace

ScaledMask rescale_mask_to_fraction(const Raster<1>& mask, double target, int height, int width) {
  if (!(target > 0.0 && target < 1.0)) throw DomainError("rescale_mask_to_area: target fraction must be in (0,1)");
  const SourceShape src = describe(mask);
  auto area = [&](const ScaledMask& m) { return m.area_fraction(height, width); };
  auto close = [&](double a) { return std::abs(a - target) <= kAreaTolerance; };

  ScaledMask cur = render_scaled(src, 1.0, height, width);
  if (close(area(cur))) return cur;

  double lo = 0.0, hi = 1.0;
  if (area(cur) < target) {
    const double extent = std::max(src.x1 - src.x0 + 1, src.y1 - src.y0 + 1);
    const double cap = 64.0 * std::max(height, width) / extent;
    while (true) {
      lo = hi;
      hi *= 2.0;
      if (hi > cap) throw DomainError("rescale_mask_to_area: target fraction unreachable");
      cur = render_scaled(src, hi, height, width);
      if (close(area(cur))) return cur;
      if (area(cur) > target) break;
    }
  }
  for (int it = 0; it < 20; ++it) {
    const double mid = 0.5 * (lo + hi);
    cur = render_scaled(src, mid, height, width);
    const double a = area(cur);
    if (close(a)) return cur;
    (a < target ? lo : hi) = mid;
  }
  throw DomainError("rescale_mask_to_area: no scale within tolerance of target fraction");
}

ScaledMask rescale_mask_to_area(const Raster<1>& mask, Interval range, int height, int width, Rng& rng) {
  if (!(range.lo > 0.0 && range.hi < 1.0 && range.lo <= range.hi))
    throw DomainError("rescale_mask_to_area: range must lie inside (0,1)");
  return rescale_mask_to_fraction(mask, rng.uniform(range.lo, range.hi), height, width);
}

ScaledMask place_mask(const ScaledMask& mask, int location_severity, int height, int width) {
  const Point2 target = location_target(location_severity, height, width);
  const Point2 c = mask.centroid();
  ScaledMask out = mask;
  out.origin_x += static_cast<int>(std::lround(target.x - c.x));
  out.origin_y += static_cast<int>(std::lround(target.y - c.y));
  return out;
}

ScalarField place_mask(const ScalarField& mask, int location_severity, double* clip_fraction) {
  ScaledMask sm;
  sm.field = Plane(mask.height(), mask.width());
  for (std::size_t i = 0; i < mask.size(); ++i) sm.field[i] = mask[i] >= 0.5 ? 1.0 : 0.0;
  const ScaledMask placed = place_mask(sm, location_severity, mask.height(), mask.width());
  auto canvas = placed.to_canvas(mask.height(), mask.width());
  if (clip_fraction) *clip_fraction = canvas.clip_fraction;
  canvas.mask.set_role(mask.role());
  return std::move(canvas.mask);
}

// ---------------------------------------------------------------------------
// grid

int grid_index(int intensity, int size, int shape, int location) noexcept {
  return (intensity - 1) * 27 + (size - 1) * 9 + (shape - 1) * 3 + (location - 1);
}

FactorSpec grid_spec(int index) noexcept {
  FactorSpec s;
  s.intensity_severity = index / 27 + 1;
  s.size_severity = index / 9 % 3 + 1;
  s.shape_severity = index / 3 % 3 + 1;
  s.location_severity = index % 3 + 1;
  return s;
}

std::string grid_cell_name(const std::string& stem, const FactorSpec& spec) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "__i%ds%dh%dl%d", spec.intensity_severity, spec.size_severity, spec.shape_severity,
                spec.location_severity);
  return stem + buf;
}

namespace {

constexpr int kRedrawAttempts = 16;

GridCell make_cell(const Image& clean, const ScalarField& depth, const std::vector<const SilhouetteEntry*>& bin,
                   FactorSpec spec, const SynthSettings& settings, const std::string& stem) {
  const int h = clean.height(), w = clean.width();
  Rng rng(spec.rng_seed);
  const double alpha = sample_intensity(spec.intensity_severity, rng);
  const Interval size = area_range(spec.size_severity);

  for (int attempt = 0; attempt < kRedrawAttempts; ++attempt) {
    const SilhouetteEntry& sil = *bin[rng.index(bin.size())];
    ScaledMask scaled;
    try {
      scaled = rescale_mask_to_area(sil.mask, size, h, w, rng);
    } catch (const DomainError&) {
      continue;
    }
    const ScaledMask placed = place_mask(scaled, spec.location_severity, h, w);
    auto canvas = placed.to_canvas(h, w);

    GridCell cell;
    ShadowParams params{alpha, settings.beta, canvas.mask, depth, settings.matte};
    cell.image = compose_shadow(clean, params);
    cell.mask = std::move(canvas.mask);
    auto& r = cell.record;
    r.output_image = grid_cell_name(stem, spec) + ".png";
    r.factor_spec = spec;
    r.alpha = alpha;
    r.mask_id = sil.id;
    r.area_fraction = placed.area_fraction(h, w);
    r.centroid = placed.centroid();
    r.complexity = sil.complexity;
    r.clip_fraction = canvas.clip_fraction;
    return cell;
  }
  throw DomainError("generate_grid: no silhouette in shape bin " + std::to_string(spec.shape_severity) +
                    " reaches the size-" + std::to_string(spec.size_severity) + " area range");
}

}  // namespace

std::vector<CellOutcome> generate_grid_cells(const Image& clean, const ScalarField& depth,
                                             std::span<const SilhouetteEntry> library, std::uint64_t seed,
                                             const SynthSettings& settings, const std::string& source_stem) {
  require_same_extent(clean, depth, "generate_grid");
  std::array<std::vector<const SilhouetteEntry*>, 3> bins;
  for (const auto& e : library) {
    check_severity(e.severity_bin);
    bins[e.severity_bin - 1].push_back(&e);
  }
  for (int b = 0; b < 3; ++b)
    if (bins[b].empty()) throw DomainError("generate_grid: shape bin " + std::to_string(b + 1) + " is empty");

  std::vector<CellOutcome> out(kGridCells);
#pragma omp parallel for schedule(dynamic)
  for (int idx = 0; idx < kGridCells; ++idx) {
    FactorSpec spec = grid_spec(idx);
    spec.rng_seed = derive_seed(seed, static_cast<std::uint64_t>(idx));
    try {
      out[idx].cell = make_cell(clean, depth, bins[spec.shape_severity - 1], spec, settings, source_stem);
    } catch (const std::exception& e) {
      out[idx].error = e.what();
    }
  }
  return out;
}

std::vector<GridCell> generate_grid(const Image& clean, const ScalarField& depth,
                                    std::span<const SilhouetteEntry> library, std::uint64_t seed,
                                    const SynthSettings& settings, const std::string& source_stem) {
  auto outcomes = generate_grid_cells(clean, depth, library, seed, settings, source_stem);
  std::vector<GridCell> cells;
  cells.reserve(kGridCells);
  for (int idx = 0; idx < kGridCells; ++idx) {
    if (!outcomes[idx].cell) throw DomainError("cell " + std::to_string(idx) + ": " + outcomes[idx].error);
    cells.push_back(std::move(*outcomes[idx].cell));
  }
  return cells;
}

}  // namespace shadowbench
