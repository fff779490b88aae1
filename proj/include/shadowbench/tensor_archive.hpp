#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace shadowbench {

/// Named float32 tensors stored as: an 8-byte little-endian header length, a
/// JSON header {"format", "version", "tensors": [{name, dtype, shape, offset,
/// nbytes}]}, then the raw little-endian float32 payload. Offsets are relative
/// to the first payload byte. Entries are written in name order.
class TensorArchive {
 public:
  struct Entry {
    std::vector<int> shape;
    std::vector<float> values;
  };

  void put(const std::string& name, std::vector<int> shape, std::vector<float> values);
  void put(const std::string& name, std::vector<int> shape, const std::vector<double>& values);
  bool contains(const std::string& name) const { return entries_.count(name) != 0; }
  /// Throws ConfigError when missing or when the shape differs from `expected`
  /// (skipped when `expected` is empty).
  const Entry& get(const std::string& name, const std::vector<int>& expected = {}) const;
  std::vector<double> get_doubles(const std::string& name, const std::vector<int>& expected = {}) const;
  const std::map<std::string, Entry>& entries() const noexcept { return entries_; }

  void save(const std::filesystem::path& path) const;
  static TensorArchive load(const std::filesystem::path& path);

 private:
  std::map<std::string, Entry> entries_;
};

}  // namespace shadowbench
