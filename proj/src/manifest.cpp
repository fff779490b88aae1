#include "shadowbench/manifest.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "shadowbench/errors.hpp"

namespace shadowbench {
namespace {

std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path) {
  std::istringstream in(read_text(path));
  std::vector<nlohmann::json> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw IoError(IoErrorKind::corrupt_stream,
                    path.string() + ":" + std::to_string(lineno) + ": invalid JSON: " + e.what());
    }
  }
  return out;
}

template <class T, class F>
void write_jsonl(const std::filesystem::path& path, const std::vector<T>& items, F to_json) {
  std::string text;
  for (const auto& item : items) text += to_json(item).dump() + "\n";
  write_text(path, text);
}

}  // namespace

OrderedJson record_to_json(const DatasetManifestRecord& r) {
  OrderedJson j;
  j["source_image"] = r.source_image;
  j["output_image"] = r.output_image;
  j["factor_spec"] = {{"intensity_severity", r.factor_spec.intensity_severity},
                      {"size_severity", r.factor_spec.size_severity},
                      {"shape_severity", r.factor_spec.shape_severity},
                      {"location_severity", r.factor_spec.location_severity},
                      {"rng_seed", r.factor_spec.rng_seed}};
  j["alpha"] = r.alpha;
  j["mask_id"] = r.mask_id;
  j["area_fraction"] = r.area_fraction;
  j["centroid"] = {r.centroid.x, r.centroid.y};
  j["complexity"] = r.complexity;
  j["clip_fraction"] = r.clip_fraction;
  j["mask_image"] = r.mask_image;
  if (r.attack) {
    const auto& a = *r.attack;
    j["attack"] = true;
    j["initial_loss"] = a.initial_loss;
    j["final_loss"] = a.final_loss;
    j["theta"] = a.theta;
    j["mask_linf"] = a.mask_linf;
    j["best_iteration"] = a.best_iteration;
  }
  return j;
}

DatasetManifestRecord record_from_json(const nlohmann::json& j) {
  try {
    DatasetManifestRecord r;
    r.source_image = j.at("source_image").get<std::string>();
    r.output_image = j.at("output_image").get<std::string>();
    const auto& fs = j.at("factor_spec");
    r.factor_spec.intensity_severity = fs.at("intensity_severity").get<int>();
    r.factor_spec.size_severity = fs.at("size_severity").get<int>();
    r.factor_spec.shape_severity = fs.at("shape_severity").get<int>();
    r.factor_spec.location_severity = fs.at("location_severity").get<int>();
    r.factor_spec.rng_seed = fs.at("rng_seed").get<std::uint64_t>();
    r.alpha = j.at("alpha").get<double>();
    r.mask_id = j.at("mask_id").get<std::string>();
    r.area_fraction = j.at("area_fraction").get<double>();
    const auto c = j.at("centroid").get<std::array<double, 2>>();
    r.centroid = {c[0], c[1]};
    r.complexity = j.at("complexity").get<double>();
    r.clip_fraction = j.value("clip_fraction", 0.0);
    r.mask_image = j.value("mask_image", std::string());
    if (j.value("attack", false)) {
      DatasetManifestRecord::AttackInfo a;
      a.initial_loss = j.at("initial_loss").get<double>();
      a.final_loss = j.at("final_loss").get<double>();
      a.theta = j.at("theta").get<std::array<double, 6>>();
      a.mask_linf = j.at("mask_linf").get<double>();
      a.best_iteration = j.at("best_iteration").get<int>();
      r.attack = a;
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(IoErrorKind::corrupt_stream, std::string("manifest record: ") + e.what());
  }
}

void write_manifest(const std::filesystem::path& path, const std::vector<DatasetManifestRecord>& records) {
  write_jsonl(path, records, record_to_json);
}

std::vector<DatasetManifestRecord> read_manifest(const std::filesystem::path& path) {
  std::vector<DatasetManifestRecord> out;
  for (const auto& j : read_jsonl(path)) out.push_back(record_from_json(j));
  return out;
}

OrderedJson trace_to_json(const TraceEntry& e) {
  OrderedJson j;
  j["iter"] = e.iter;
  j["loss"] = e.loss;
  j["alpha"] = e.alpha;
  j["theta"] = e.theta;
  j["mask_linf"] = e.mask_linf;
  return j;
}

TraceEntry trace_from_json(const nlohmann::json& j) {
  try {
    TraceEntry e;
    e.iter = j.at("iter").get<int>();
    e.loss = j.at("loss").get<double>();
    e.alpha = j.at("alpha").get<double>();
    e.theta = j.at("theta").get<std::array<double, 6>>();
    e.mask_linf = j.at("mask_linf").get<double>();
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw IoError(IoErrorKind::corrupt_stream, std::string("trace entry: ") + ex.what());
  }
}

void write_trace(const std::filesystem::path& path, const std::vector<TraceEntry>& trace) {
  write_jsonl(path, trace, trace_to_json);
}

std::vector<TraceEntry> read_trace(const std::filesystem::path& path) {
  std::vector<TraceEntry> out;
  for (const auto& j : read_jsonl(path)) out.push_back(trace_from_json(j));
  return out;
}

OrderedJson landmarks_to_json(const Landmarks& l) {
  OrderedJson j = OrderedJson::array();
  for (const auto& p : l) j.push_back({p.x, p.y});
  return j;
}

Landmarks landmarks_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != static_cast<std::size_t>(kLandmarkCount))
    throw IoError(IoErrorKind::corrupt_stream, "landmarks must be an array of 68 [x, y] pairs");
  Landmarks l;
  try {
    for (int i = 0; i < kLandmarkCount; ++i) {
      const auto p = j[i].get<std::array<double, 2>>();
      l[i] = {p[0], p[1]};
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError(IoErrorKind::corrupt_stream, std::string("landmarks: ") + e.what());
  }
  return l;
}

void write_landmarks(const std::filesystem::path& path, const Landmarks& l) {
  write_text(path, landmarks_to_json(l).dump() + "\n");
}

Landmarks read_landmarks(const std::filesystem::path& path) {
  try {
    return landmarks_from_json(nlohmann::json::parse(read_text(path)));
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError(IoErrorKind::corrupt_stream, path.string() + ": " + e.what());
  }
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(IoErrorKind::missing_file, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(IoErrorKind::write_failed, "cannot write " + path.string());
  out << text;
  if (!out) throw IoError(IoErrorKind::write_failed, "write failed: " + path.string());
}

std::string file_digest(const std::filesystem::path& path) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : read_text(path)) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace shadowbench
