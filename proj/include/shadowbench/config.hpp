#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "shadowbench/adv_attack.hpp"
#include "shadowbench/factor_bench.hpp"
#include "shadowbench/metrics.hpp"

namespace shadowbench {

enum class OracleKind { toy, exec };

struct OracleConfig {
  OracleKind kind = OracleKind::toy;
  std::vector<std::string> command;  // argv of the external detector
  double fd_step = 1e-3;
  std::uint64_t toy_weights_seed = 7;
};

/// Severities of the initial occluder the attack starts from.
struct AttackInit {
  int size_severity = 2;
  int shape_severity = 2;
  int location_severity = 2;
};

struct RunConfig {
  std::filesystem::path input_dir;
  std::filesystem::path silhouette_dir;  // empty: built-in starter shapes
  std::filesystem::path output_dir;
  std::filesystem::path landmarks_dir;
  std::filesystem::path depth_dir;  // empty: synthetic face depth
  std::optional<std::uint64_t> seed;
  SynthSettings synth;
  AttackConfig attack;
  AttackInit attack_init;
  MetricMode metric_mode = MetricMode::rms;
  int worker_count = 1;
  OracleConfig oracle;

  /// Defaults overlaid with `j`. Unknown keys are rejected.
  static RunConfig from_json(const nlohmann::json& j);
  nlohmann::ordered_json to_json() const;

  std::uint64_t require_seed() const;
  /// Checks value ranges (not directories).
  void validate() const;
};

/// Recursively overlays `overrides` onto `base` (objects merge, other values replace).
nlohmann::json merge_json(nlohmann::json base, const nlohmann::json& overrides);

/// Reads a config file (empty path: {}) and applies flag overrides.
RunConfig load_config(const std::filesystem::path& file, const nlohmann::json& overrides);

/// ConfigError unless `dir` is set and names an existing directory.
void require_dir(const std::filesystem::path& dir, const char* key);

}  // namespace shadowbench
