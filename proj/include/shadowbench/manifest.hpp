#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "shadowbench/adv_attack.hpp"
#include "shadowbench/factor_bench.hpp"
#include "shadowbench/geometry.hpp"

namespace shadowbench {

using OrderedJson = nlohmann::ordered_json;

OrderedJson record_to_json(const DatasetManifestRecord& r);
DatasetManifestRecord record_from_json(const nlohmann::json& j);

/// One compact JSON object per line, '\n' terminated.
void write_manifest(const std::filesystem::path& path, const std::vector<DatasetManifestRecord>& records);
std::vector<DatasetManifestRecord> read_manifest(const std::filesystem::path& path);

OrderedJson trace_to_json(const TraceEntry& e);
TraceEntry trace_from_json(const nlohmann::json& j);
void write_trace(const std::filesystem::path& path, const std::vector<TraceEntry>& trace);
std::vector<TraceEntry> read_trace(const std::filesystem::path& path);

OrderedJson landmarks_to_json(const Landmarks& l);
Landmarks landmarks_from_json(const nlohmann::json& j);
void write_landmarks(const std::filesystem::path& path, const Landmarks& l);
Landmarks read_landmarks(const std::filesystem::path& path);

/// Whole-file helpers; throw IoError.
std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

/// FNV-1a 64-bit of a file's bytes, hex encoded.
std::string file_digest(const std::filesystem::path& path);

}  // namespace shadowbench
