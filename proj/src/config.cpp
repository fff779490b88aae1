#include "shadowbench/config.hpp"

#include <cstdint>
#include <set>

#include "shadowbench/errors.hpp"
#include "shadowbench/manifest.hpp"

namespace shadowbench {
namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) throw ConfigError("unknown config key " + where + "." + k);
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void read_path(const json& j, const char* key, std::filesystem::path& out) {
  if (j.contains(key)) out = j.at(key).get<std::string>();
}

}  // namespace

json merge_json(json base, const json& overrides) {
  if (!base.is_object() || !overrides.is_object()) return overrides;
  for (const auto& [k, v] : overrides.items()) {
    if (base.contains(k) && base[k].is_object() && v.is_object())
      base[k] = merge_json(base[k], v);
    else
      base[k] = v;
  }
  return base;
}

RunConfig RunConfig::from_json(const json& j) {
  RunConfig c;
  try {
    reject_unknown(j,
                   {"input_dir", "silhouette_dir", "output_dir", "landmarks_dir", "depth_dir", "seed", "matte", "beta",
                    "attack", "attack_init", "metric_mode", "worker_count", "oracle"},
                   "config");
    read_path(j, "input_dir", c.input_dir);
    read_path(j, "silhouette_dir", c.silhouette_dir);
    read_path(j, "output_dir", c.output_dir);
    read_path(j, "landmarks_dir", c.landmarks_dir);
    read_path(j, "depth_dir", c.depth_dir);
    if (j.contains("seed") && !j.at("seed").is_null()) {
      const auto& sj = j.at("seed");
      if (!sj.is_number_integer() || (!sj.is_number_unsigned() && sj.get<std::int64_t>() < 0))
        throw ConfigError("seed must be a non-negative integer");
      c.seed = j.at("seed").get<std::uint64_t>();
    }
    if (j.contains("matte")) {
      const auto& m = j.at("matte");
      reject_unknown(m, {"sigma_min", "sigma_max", "scatter_spread", "depth_gain"}, "matte");
      read(m, "sigma_min", c.synth.matte.sigma_min);
      read(m, "sigma_max", c.synth.matte.sigma_max);
      read(m, "scatter_spread", c.synth.matte.scatter_spread);
      read(m, "depth_gain", c.synth.matte.depth_gain);
    }
    if (j.contains("beta")) {
      const auto& b = j.at("beta");
      reject_unknown(b, {"slope", "intercept"}, "beta");
      read(b, "slope", c.synth.beta.slope);
      read(b, "intercept", c.synth.beta.intercept);
    }
    if (j.contains("attack")) {
      const auto& a = j.at("attack");
      reject_unknown(a,
                     {"step_alpha", "step_theta", "step_mask", "iterations", "eps_alpha", "eps_theta", "eps_mask",
                      "alpha0"},
                     "attack");
      read(a, "step_alpha", c.attack.step_alpha);
      read(a, "step_theta", c.attack.step_theta);
      read(a, "step_mask", c.attack.step_mask);
      read(a, "iterations", c.attack.iterations);
      read(a, "eps_alpha", c.attack.eps_alpha);
      read(a, "eps_theta", c.attack.eps_theta);
      read(a, "eps_mask", c.attack.eps_mask);
      read(a, "alpha0", c.attack.alpha0);
    }
    if (j.contains("attack_init")) {
      const auto& a = j.at("attack_init");
      reject_unknown(a, {"size_severity", "shape_severity", "location_severity"}, "attack_init");
      read(a, "size_severity", c.attack_init.size_severity);
      read(a, "shape_severity", c.attack_init.shape_severity);
      read(a, "location_severity", c.attack_init.location_severity);
    }
    if (j.contains("metric_mode")) c.metric_mode = parse_metric_mode(j.at("metric_mode").get<std::string>());
    read(j, "worker_count", c.worker_count);
    if (j.contains("oracle")) {
      const auto& o = j.at("oracle");
      reject_unknown(o, {"kind", "command", "fd_step", "toy_weights_seed"}, "oracle");
      if (o.contains("kind")) {
        const auto k = o.at("kind").get<std::string>();
        if (k == "toy")
          c.oracle.kind = OracleKind::toy;
        else if (k == "exec")
          c.oracle.kind = OracleKind::exec;
        else
          throw ConfigError("oracle.kind must be toy or exec, got " + k);
      }
      read(o, "command", c.oracle.command);
      read(o, "fd_step", c.oracle.fd_step);
      read(o, "toy_weights_seed", c.oracle.toy_weights_seed);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

nlohmann::ordered_json RunConfig::to_json() const {
  nlohmann::ordered_json j;
  j["input_dir"] = input_dir.string();
  j["silhouette_dir"] = silhouette_dir.string();
  j["output_dir"] = output_dir.string();
  j["landmarks_dir"] = landmarks_dir.string();
  j["depth_dir"] = depth_dir.string();
  j["seed"] = seed ? nlohmann::ordered_json(*seed) : nlohmann::ordered_json();
  j["matte"] = {{"sigma_min", synth.matte.sigma_min},
                {"sigma_max", synth.matte.sigma_max},
                {"scatter_spread", synth.matte.scatter_spread},
                {"depth_gain", synth.matte.depth_gain}};
  j["beta"] = {{"slope", synth.beta.slope}, {"intercept", synth.beta.intercept}};
  j["attack"] = {{"step_alpha", attack.step_alpha}, {"step_theta", attack.step_theta},
                 {"step_mask", attack.step_mask},   {"iterations", attack.iterations},
                 {"eps_alpha", attack.eps_alpha},   {"eps_theta", attack.eps_theta},
                 {"eps_mask", attack.eps_mask},     {"alpha0", attack.alpha0}};
  j["attack_init"] = {{"size_severity", attack_init.size_severity},
                      {"shape_severity", attack_init.shape_severity},
                      {"location_severity", attack_init.location_severity}};
  j["metric_mode"] = metric_mode_name(metric_mode);
  j["worker_count"] = worker_count;
  j["oracle"] = {{"kind", oracle.kind == OracleKind::toy ? "toy" : "exec"},
                 {"command", oracle.command},
                 {"fd_step", oracle.fd_step},
                 {"toy_weights_seed", oracle.toy_weights_seed}};
  return j;
}

std::uint64_t RunConfig::require_seed() const {
  if (!seed) throw ConfigError("a seed is required (config \"seed\" or --seed)");
  return *seed;
}

void RunConfig::validate() const {
  synth.matte.validate();
  attack.validate();
  for (int s : {attack_init.size_severity, attack_init.shape_severity, attack_init.location_severity})
    if (s < 1 || s > 3) throw ConfigError("attack_init severities must be 1, 2 or 3");
  if (worker_count < 1) throw ConfigError("worker_count must be >= 1");
  if (!(oracle.fd_step > 0.0)) throw ConfigError("oracle.fd_step must be positive");
}

RunConfig load_config(const std::filesystem::path& file, const json& overrides) {
  json base = json::object();
  if (!file.empty()) {
    try {
      base = json::parse(read_text(file));
    } catch (const json::parse_error& e) {
      throw ConfigError("config file " + file.string() + ": " + e.what());
    } catch (const IoError& e) {
      throw ConfigError(std::string("config file: ") + e.what());
    }
  }
  return RunConfig::from_json(merge_json(std::move(base), overrides));
}

void require_dir(const std::filesystem::path& dir, const char* key) {
  if (dir.empty()) throw ConfigError(std::string(key) + " is not set");
  if (!std::filesystem::is_directory(dir)) throw ConfigError(std::string(key) + " is not a directory: " + dir.string());
}

}  // namespace shadowbench
