#include "shadowbench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace shadowbench {

const char* metric_mode_name(MetricMode m) noexcept { return m == MetricMode::rms ? "rms" : "mae_compat"; }

MetricMode parse_metric_mode(const std::string& s) {
  if (s == "rms") return MetricMode::rms;
  if (s == "mae_compat") return MetricMode::mae_compat;
  throw ConfigError("metric_mode must be \"rms\" or \"mae_compat\", got \"" + s + "\"");
}

namespace {

struct Accum {
  double sum = 0.0;
  std::size_t n = 0;
  void add(double d2, MetricMode mode) {
    sum += mode == MetricMode::rms ? d2 : std::sqrt(d2);
    ++n;
  }
  std::optional<double> value(MetricMode mode) const {
    if (n == 0) return std::nullopt;
    const double mean = sum / static_cast<double>(n);
    return mode == MetricMode::rms ? std::sqrt(mean) : mean;
  }
};

}  // namespace

double rmse_lab(const Image& a, const Image& b, const Raster<1>* region, MetricMode mode) {
  require_same_extent(a, b, "rmse_lab");
  if (region) require_same_extent(a, *region, "rmse_lab region");
  Accum acc;
  const std::size_t n = a.pixels();
  for (std::size_t p = 0; p < n; ++p) {
    if (region && (*region)[p] < 0.5) continue;
    const Lab la = srgb_to_lab(a[3 * p], a[3 * p + 1], a[3 * p + 2]);
    const Lab lb = srgb_to_lab(b[3 * p], b[3 * p + 1], b[3 * p + 2]);
    acc.add(lab_distance_sq(la, lb), mode);
  }
  const auto v = acc.value(mode);
  if (!v) throw DomainError("rmse_lab: empty region");
  return *v;
}

RegionReport region_report(const Image& clean, const Image& restored, const Raster<1>& shadow_mask,
                           MetricMode mode) {
  require_same_extent(clean, restored, "region_report");
  require_same_extent(clean, shadow_mask, "region_report mask");
  Accum in, out, all;
  const std::size_t n = clean.pixels();
  for (std::size_t p = 0; p < n; ++p) {
    const Lab la = srgb_to_lab(clean[3 * p], clean[3 * p + 1], clean[3 * p + 2]);
    const Lab lb = srgb_to_lab(restored[3 * p], restored[3 * p + 1], restored[3 * p + 2]);
    const double d2 = lab_distance_sq(la, lb);
    (shadow_mask[p] >= 0.5 ? in : out).add(d2, mode);
    all.add(d2, mode);
  }
  RegionReport r;
  r.rmse_shadow = in.value(mode);
  r.rmse_non_shadow = out.value(mode);
  r.rmse_all = all.value(mode).value_or(0.0);
  r.pixels_shadow = in.n;
  r.pixels_non_shadow = out.n;
  r.pixels_all = all.n;
  return r;
}

double nme(const Landmarks& pred, const Landmarks& truth) {
  const double iod = std::hypot(truth[kLeftEyeOuter].x - truth[kRightEyeOuter].x,
                                truth[kLeftEyeOuter].y - truth[kRightEyeOuter].y);
  if (!(iod > 0.0)) throw DomainError("nme: coincident outer eye corners");
  double acc = 0.0;
  for (int i = 0; i < kLandmarkCount; ++i) {
    if (!std::isfinite(pred[i].x) || !std::isfinite(pred[i].y)) throw DomainError("nme: non-finite prediction");
    acc += std::hypot(pred[i].x - truth[i].x, pred[i].y - truth[i].y);
  }
  return 100.0 * acc / kLandmarkCount / iod;
}

double relative_gain(double base, double value) {
  if (base == 0.0) throw DomainError("relative_gain: zero baseline");
  return 100.0 * (base - value) / base;
}

std::vector<std::string> summary_group_keys() {
  std::vector<std::string> keys{"overall"};
  for (Factor f : kFactors)
    for (int s = 1; s <= 3; ++s) keys.push_back(std::string(factor_name(f)) + "/" + std::to_string(s));
  return keys;
}

namespace {

struct MeanAcc {
  double sum = 0.0;
  std::size_t n = 0;
  void add(const std::optional<double>& v) {
    if (v) {
      sum += *v;
      ++n;
    }
  }
  std::optional<double> mean() const { return n ? std::optional<double>(sum / n) : std::nullopt; }
};

struct GroupAcc {
  std::size_t records = 0, missing = 0;
  MeanAcc shadow, non_shadow, all, nme;
  void add(const ItemMetrics& m) {
    ++records;
    if (!m.rmse_all || !m.nme) ++missing;
    shadow.add(m.rmse_shadow);
    non_shadow.add(m.rmse_non_shadow);
    all.add(m.rmse_all);
    nme.add(m.nme);
  }
  GroupStats stats() const {
    return {records, shadow.mean(), non_shadow.mean(), all.mean(), nme.mean(), missing};
  }
};

}  // namespace

SummaryTable aggregate_report(const std::vector<DatasetManifestRecord>& manifest,
                              const std::vector<ItemMetrics>& metrics) {
  if (manifest.size() != metrics.size()) throw DomainError("aggregate_report: manifest and metrics differ in length");
  std::vector<std::size_t> order(manifest.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ra = manifest[a];
    const auto& rb = manifest[b];
    if (ra.output_image != rb.output_image) return ra.output_image < rb.output_image;
    return ra.source_image < rb.source_image;
  });

  std::map<std::string, GroupAcc> acc;
  SummaryTable table;
  for (std::size_t idx : order) {
    const auto& rec = manifest[idx];
    const auto& m = metrics[idx];
    if (!m.rmse_all && !m.nme) table.missing_records.push_back(rec.output_image);
    acc["overall"].add(m);
    for (Factor f : kFactors) {
      const int s = rec.factor_spec.severity(f);
      check_severity(s);
      acc[std::string(factor_name(f)) + "/" + std::to_string(s)].add(m);
    }
  }
  for (const auto& [key, a] : acc) table.groups[key] = a.stats();
  return table;
}

}  // namespace shadowbench
