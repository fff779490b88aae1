#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "shadowbench/factor_bench.hpp"
#include "shadowbench/manifest.hpp"
#include "shadowbench/silhouettes.hpp"
#include "support.hpp"

using namespace shadowbench;

static ScalarField polar_shape(int size, double amp, int lobes) {
  ScalarField m(size, size);
  const double c = size / 2.0, r0 = 0.3 * size;
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      const double dx = x + 0.5 - c, dy = y + 0.5 - c;
      const double t = std::atan2(dy, dx);
      m.at(y, x) = std::hypot(dx, dy) <= r0 * (1.0 + amp * std::cos(lobes * t)) ? 1.0 : 0.0;
    }
  return m;
}

static ScalarField disk(int h, int w, double cx, double cy, double r) {
  ScalarField m(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) m.at(y, x) = std::hypot(x - cx, y - cy) <= r ? 1.0 : 0.0;
  return m;
}

TEST_CASE("intensity draws stay inside their severity range") {
  Rng rng(1);
  for (int s = 1; s <= 3; ++s)
    for (int i = 0; i < 10000; ++i) CHECK(intensity_range(s).contains(sample_intensity(s, rng)));
  CHECK(intensity_range(1).lo == 0.8);
  CHECK(intensity_range(1).hi == 1.0);
  CHECK(intensity_range(2).lo == 0.4);
  CHECK(intensity_range(3).hi == 0.2);
  Rng a(7), b(7);
  CHECK(sample_intensity(2, a) == sample_intensity(2, b));
  CHECK_THROWS_AS(sample_intensity(4, a), DomainError);
  CHECK_THROWS_AS(check_severity(0), DomainError);
}

TEST_CASE("area ranges and location targets") {
  CHECK(area_range(1).lo == 0.10);
  CHECK(area_range(1).hi == 0.20);
  CHECK(area_range(2).lo == 0.45);
  CHECK(area_range(3).hi == 0.90);
  const Point2 top = location_target(1, 120, 60);
  CHECK(top.x == 30.0);
  CHECK(top.y == 20.0);
  CHECK(location_target(2, 100, 100).y == 50.0);
  CHECK(location_target(3, 60, 60).y == 50.0);
}

TEST_CASE("disk complexity is near zero and scale-free") {
  const double e1 = shape_complexity(disk(120, 120, 60, 60, 50));
  const double e2 = shape_complexity(disk(240, 240, 120, 120, 100));
  CHECK(e1 < 0.02);
  CHECK(std::abs(e1 - e2) < 0.005);
  const double shifted = shape_complexity(disk(120, 120, 55, 63, 50));
  CHECK(std::abs(shifted - e1) < 0.005);
}

TEST_CASE("complexity is exactly translation invariant on the pixel grid") {
  ScalarField a(40, 40), b(40, 40);
  const ScalarField s = polar_shape(20, 0.3, 5);
  for (int y = 0; y < 20; ++y)
    for (int x = 0; x < 20; ++x) {
      a.at(y + 3, x + 2) = s.at(y, x);
      b.at(y + 17, x + 11) = s.at(y, x);
    }
  CHECK(shape_complexity(a) == doctest::Approx(shape_complexity(b)).epsilon(1e-12));
}

TEST_CASE("complexity ranks increasingly irregular exemplars in order") {
  const double low = shape_complexity(polar_shape(160, 0.05, 3));
  const double mid = shape_complexity(polar_shape(160, 0.2, 5));
  const double high = shape_complexity(polar_shape(160, 0.4, 7));
  CHECK(low < mid);
  CHECK(mid < high);
}

TEST_CASE("complexity rejects empty and multi-component masks") {
  CHECK_THROWS_AS(shape_complexity(ScalarField(10, 10)), DomainError);
  ScalarField two(10, 10);
  two.at(1, 1) = two.at(7, 7) = 1.0;
  CHECK_THROWS_AS(shape_complexity(two), DomainError);
  ScalarField diag(10, 10);
  diag.at(2, 2) = diag.at(3, 3) = 1.0;  // 8-connected: one component
  CHECK_NOTHROW(shape_complexity(diag));
}

TEST_CASE("tercile binning") {
  CHECK(tercile_sizes(132) == std::array<std::size_t, 3>{44, 44, 44});
  CHECK(tercile_sizes(4) == std::array<std::size_t, 3>{2, 1, 1});
  CHECK(tercile_sizes(5) == std::array<std::size_t, 3>{2, 2, 1});
  CHECK(tercile_sizes(3) == std::array<std::size_t, 3>{1, 1, 1});

  std::vector<NamedMask> lib{{"b", polar_shape(80, 0.4, 7)}, {"a", polar_shape(80, 0.0, 3)},
                             {"c", polar_shape(80, 0.15, 5)}};
  const auto binned = bin_silhouettes(lib);
  REQUIRE(binned.size() == 3);
  CHECK(binned[0].id == "a");
  CHECK(binned[0].severity_bin == 1);
  CHECK(binned[1].id == "c");
  CHECK(binned[1].severity_bin == 2);
  CHECK(binned[2].id == "b");
  CHECK(binned[2].severity_bin == 3);
}

TEST_CASE("starter library partitions into bins") {
  const auto binned = bin_silhouettes(starter_silhouettes());
  REQUIRE(binned.size() == 12);
  std::array<int, 3> counts{};
  std::set<std::string> ids;
  for (std::size_t i = 0; i < binned.size(); ++i) {
    ++counts[binned[i].severity_bin - 1];
    ids.insert(binned[i].id);
    if (i > 0) CHECK(binned[i - 1].complexity <= binned[i].complexity);
  }
  CHECK(counts == std::array<int, 3>{4, 4, 4});
  CHECK(ids.size() == 12);
  CHECK(ids.count("disk"));
}

TEST_CASE("rescaling reaches the requested area within tolerance") {
  Rng rng(5);
  const auto lib = starter_silhouettes();
  for (int trial = 0; trial < 60; ++trial) {
    const auto& m = lib[rng.index(lib.size())].mask;
    const int s = 1 + static_cast<int>(rng.index(3));
    const int h = 48 + static_cast<int>(rng.index(40)), w = 48 + static_cast<int>(rng.index(40));
    const ScaledMask sm = rescale_mask_to_area(m, area_range(s), h, w, rng);
    const double a = sm.area_fraction(h, w);
    CHECK(a >= area_range(s).lo - kAreaTolerance);
    CHECK(a <= area_range(s).hi + kAreaTolerance);
  }
}

TEST_CASE("rescaling to the current fraction keeps scale near one") {
  const ScalarField d = disk(64, 64, 32, 32, 20);
  const double now = static_cast<double>(d.foreground_count()) / (64.0 * 64.0);
  const ScaledMask sm = rescale_mask_to_fraction(d, now, 64, 64);
  CHECK(std::abs(sm.scale - 1.0) < 0.05);
  const auto canvas = sm.to_canvas(64, 64);
  std::size_t differ = 0;
  for (std::size_t i = 0; i < d.size(); ++i) differ += (canvas.mask[i] >= 0.5) != (d[i] >= 0.5);
  CHECK(differ < d.foreground_count() / 20);
}

TEST_CASE("unreachable targets are reported") {
  ScalarField dot(5, 5);
  dot.at(2, 2) = 1.0;
  CHECK_THROWS_AS(rescale_mask_to_fraction(dot, 1.2, 40, 40), DomainError);
  CHECK_THROWS_AS(rescale_mask_to_fraction(ScalarField(5, 5), 0.2, 40, 40), DomainError);
}

TEST_CASE("placement pins the centroid to the location target") {
  const ScalarField d = disk(100, 100, 30, 70, 12);
  double clip = -1.0;
  const ScalarField placed = place_mask(d, 2, &clip);
  const auto c = foreground_centroid(placed);
  REQUIRE(c);
  CHECK(std::abs(c->x - 50.0) <= 1.0);
  CHECK(std::abs(c->y - 50.0) <= 1.0);
  CHECK(clip == 0.0);

  const ScalarField tall = disk(120, 60, 30, 60, 10);
  const auto c1 = foreground_centroid(place_mask(tall, 1));
  CHECK(std::abs(c1->x - 30.0) <= 1.0);
  CHECK(std::abs(c1->y - 20.0) <= 1.0);

  // Already centered -> identity.
  const ScalarField centered = disk(100, 100, 50, 50, 10);
  CHECK(place_mask(centered, 2) == centered);
}

TEST_CASE("large masks clip at the canvas edge and report it") {
  Rng rng(8);
  const auto lib = starter_silhouettes();
  const ScaledMask sm = rescale_mask_to_fraction(lib[2].mask, 0.85, 64, 64);
  const ScaledMask top = place_mask(sm, 1, 64, 64);
  const auto canvas = top.to_canvas(64, 64);
  CHECK(canvas.clip_fraction > 0.0);
  CHECK(std::abs(top.centroid().y - 64.0 / 6.0) <= 1.0);
  CHECK(std::abs(top.area_fraction(64, 64) - 0.85) <= kAreaTolerance);
}

TEST_CASE("grid indexing and names") {
  std::set<int> seen;
  for (int i = 1; i <= 3; ++i)
    for (int s = 1; s <= 3; ++s)
      for (int h = 1; h <= 3; ++h)
        for (int l = 1; l <= 3; ++l) {
          const int idx = grid_index(i, s, h, l);
          seen.insert(idx);
          const FactorSpec spec = grid_spec(idx);
          CHECK(spec.intensity_severity == i);
          CHECK(spec.size_severity == s);
          CHECK(spec.shape_severity == h);
          CHECK(spec.location_severity == l);
        }
  CHECK(seen.size() == 81);
  CHECK(*seen.begin() == 0);
  CHECK(*seen.rbegin() == 80);
  CHECK(grid_cell_name("img", grid_spec(grid_index(3, 1, 2, 3))) == "img__i3s1h2l3");
}

TEST_CASE("generate_grid emits 81 cells inside their severity ranges") {
  Rng rng(13);
  const Image clean = sbtest::random_image(rng, 48, 40);
  const ScalarField depth = synthetic_face_depth(48, 40);
  const auto lib = bin_silhouettes(starter_silhouettes(64));
  const auto cells = generate_grid(clean, depth, lib, 99, {}, "face");
  REQUIRE(cells.size() == 81);
  std::set<std::string> names;
  for (const auto& c : cells) {
    const auto& r = c.record;
    names.insert(r.output_image);
    CHECK(intensity_range(r.factor_spec.intensity_severity).contains(r.alpha));
    const Interval a = area_range(r.factor_spec.size_severity);
    CHECK(r.area_fraction >= a.lo - kAreaTolerance);
    CHECK(r.area_fraction <= a.hi + kAreaTolerance);
    const Point2 t = location_target(r.factor_spec.location_severity, 48, 40);
    CHECK(std::abs(r.centroid.x - t.x) <= 1.0);
    CHECK(std::abs(r.centroid.y - t.y) <= 1.0);
    CHECK(c.image.is_valid());
    bool in_bin = false;
    for (const auto& e : lib) in_bin = in_bin || (e.id == r.mask_id && e.severity_bin == r.factor_spec.shape_severity);
    CHECK(in_bin);
  }
  CHECK(names.size() == 81);

  const auto again = generate_grid(clean, depth, lib, 99, {}, "face");
  for (int i = 0; i < 81; ++i) {
    CHECK(again[i].image == cells[i].image);
    CHECK(record_to_json(again[i].record).dump() == record_to_json(cells[i].record).dump());
  }
  const auto other = generate_grid(clean, depth, lib, 100, {}, "face");
  bool differs = false;
  for (int i = 0; i < 81; ++i) differs = differs || other[i].record.alpha != cells[i].record.alpha;
  CHECK(differs);
}

TEST_CASE("generate_grid needs every shape bin populated") {
  Rng rng(3);
  const Image clean = sbtest::random_image(rng, 32, 32);
  auto lib = bin_silhouettes(starter_silhouettes(48));
  lib.erase(std::remove_if(lib.begin(), lib.end(), [](const auto& e) { return e.severity_bin == 3; }), lib.end());
  CHECK_THROWS_AS(generate_grid(clean, synthetic_face_depth(32, 32), lib, 1, {}, "x"), DomainError);
}
