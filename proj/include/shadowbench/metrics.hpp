#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "shadowbench/factor_bench.hpp"
#include "shadowbench/geometry.hpp"
#include "shadowbench/imaging.hpp"

namespace shadowbench {

/// rms: square root of the mean squared CIE76 distance (default).
/// mae_compat: mean CIE76 distance, the quantity much of the shadow-removal
/// literature reports under the name RMSE.
enum class MetricMode { rms, mae_compat };

const char* metric_mode_name(MetricMode m) noexcept;
MetricMode parse_metric_mode(const std::string& s);

/// LAB error between a and b over the pixels where region >= 0.5 (all pixels
/// when region is null). Throws ShapeError on mismatched extents and
/// DomainError on an empty region.
double rmse_lab(const Image& a, const Image& b, const Raster<1>* region = nullptr, MetricMode mode = MetricMode::rms);

struct RegionReport {
  std::optional<double> rmse_shadow;
  std::optional<double> rmse_non_shadow;
  double rmse_all = 0.0;
  std::size_t pixels_shadow = 0;
  std::size_t pixels_non_shadow = 0;
  std::size_t pixels_all = 0;
};

/// Errors over mask >= 0.5, mask < 0.5 and all pixels. An empty region is
/// reported as absent.
RegionReport region_report(const Image& clean, const Image& restored, const Raster<1>& shadow_mask,
                           MetricMode mode = MetricMode::rms);

/// Normalized mean error in percent: 100 * mean_i |pred_i - gt_i| / |gt_36 - gt_45|.
double nme(const Landmarks& pred, const Landmarks& truth);

/// 100 * (base - value) / base
double relative_gain(double base, double value);

/// Metrics of one manifest record. Absent entries were not computed.
struct ItemMetrics {
  std::optional<double> rmse_shadow;
  std::optional<double> rmse_non_shadow;
  std::optional<double> rmse_all;
  std::optional<double> nme;
};

struct GroupStats {
  std::size_t records = 0;
  std::optional<double> rmse_shadow;
  std::optional<double> rmse_non_shadow;
  std::optional<double> rmse_all;
  std::optional<double> nme;
  std::size_t missing = 0;  // records of the group lacking some metric
};

/// Group key: "overall" or "<factor>/<severity>", e.g. "size/2".
struct SummaryTable {
  std::map<std::string, GroupStats> groups;
  std::vector<std::string> missing_records;  // output_image of records without any metric
};

/// Means per (factor, severity) and overall. Records are matched to metrics by
/// position. Accumulation runs in a canonical (sorted) order, so the result
/// does not depend on record order.
SummaryTable aggregate_report(const std::vector<DatasetManifestRecord>& manifest,
                              const std::vector<ItemMetrics>& metrics);

/// Canonical group order: overall, then factor-major, severity-minor.
std::vector<std::string> summary_group_keys();

}  // namespace shadowbench
