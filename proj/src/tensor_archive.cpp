#include "shadowbench/tensor_archive.hpp"

#include <bit>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "shadowbench/errors.hpp"

namespace shadowbench {
namespace {

constexpr const char* kFormat = "shadowbench-tensors";
constexpr int kVersion = 1;

std::size_t element_count(const std::vector<int>& shape) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d < 0) throw ConfigError("tensor archive: negative dimension");
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

std::string shape_text(const std::vector<int>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) s += (i ? "," : "") + std::to_string(shape[i]);
  return s + "]";
}

}  // namespace

void TensorArchive::put(const std::string& name, std::vector<int> shape, std::vector<float> values) {
  if (element_count(shape) != values.size()) throw ConfigError("tensor archive: " + name + " size/shape mismatch");
  entries_[name] = Entry{std::move(shape), std::move(values)};
}

void TensorArchive::put(const std::string& name, std::vector<int> shape, const std::vector<double>& values) {
  put(name, std::move(shape), std::vector<float>(values.begin(), values.end()));
}

const TensorArchive::Entry& TensorArchive::get(const std::string& name, const std::vector<int>& expected) const {
  const auto it = entries_.find(name);
  if (it == entries_.end()) throw ConfigError("tensor archive: missing tensor " + name);
  if (!expected.empty() && it->second.shape != expected)
    throw ConfigError("tensor archive: " + name + " has shape " + shape_text(it->second.shape) + ", expected " +
                      shape_text(expected));
  return it->second;
}

std::vector<double> TensorArchive::get_doubles(const std::string& name, const std::vector<int>& expected) const {
  const auto& e = get(name, expected);
  return std::vector<double>(e.values.begin(), e.values.end());
}

void TensorArchive::save(const std::filesystem::path& path) const {
  nlohmann::ordered_json header;
  header["format"] = kFormat;
  header["version"] = kVersion;
  header["tensors"] = nlohmann::ordered_json::array();
  std::uint64_t offset = 0;
  for (const auto& [name, e] : entries_) {
    const std::uint64_t nbytes = e.values.size() * 4;
    header["tensors"].push_back(
        {{"name", name}, {"dtype", "float32-le"}, {"shape", e.shape}, {"offset", offset}, {"nbytes", nbytes}});
    offset += nbytes;
  }
  const std::string text = header.dump();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(IoErrorKind::write_failed, "cannot write tensor archive: " + path.string());
  const std::uint64_t len = text.size();
  for (int i = 0; i < 8; ++i) out.put(static_cast<char>((len >> (8 * i)) & 0xff));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& [name, e] : entries_)
    for (float f : e.values) {
      const std::uint32_t bits = std::bit_cast<std::uint32_t>(f);
      for (int i = 0; i < 4; ++i) out.put(static_cast<char>((bits >> (8 * i)) & 0xff));
    }
  if (!out) throw IoError(IoErrorKind::write_failed, "tensor archive write failed: " + path.string());
}

TensorArchive TensorArchive::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(IoErrorKind::missing_file, "cannot open tensor archive: " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  auto corrupt = [&](const std::string& why) {
    return IoError(IoErrorKind::corrupt_stream, "tensor archive " + path.string() + ": " + why);
  };
  if (bytes.size() < 8) throw corrupt("truncated header length");
  std::uint64_t len = 0;
  for (int i = 0; i < 8; ++i) len |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  if (len > bytes.size() - 8) throw corrupt("header length exceeds file");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.begin() + 8, bytes.begin() + 8 + static_cast<std::ptrdiff_t>(len));
  } catch (const nlohmann::json::exception& e) {
    throw corrupt(std::string("bad JSON header: ") + e.what());
  }
  if (header.value("format", "") != kFormat) throw corrupt("unknown format tag");
  const std::size_t base = 8 + len;
  TensorArchive ar;
  for (const auto& t : header.at("tensors")) {
    if (t.value("dtype", "") != "float32-le") throw corrupt("unsupported dtype");
    const auto shape = t.at("shape").get<std::vector<int>>();
    const std::uint64_t off = t.at("offset").get<std::uint64_t>();
    const std::uint64_t nbytes = t.at("nbytes").get<std::uint64_t>();
    if (nbytes != element_count(shape) * 4) throw corrupt("nbytes disagrees with shape");
    if (base + off + nbytes > bytes.size()) throw corrupt("payload truncated");
    std::vector<float> values(nbytes / 4);
    for (std::size_t k = 0; k < values.size(); ++k) {
      std::uint32_t bits = 0;
      for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(bytes[base + off + 4 * k + i]) << (8 * i);
      values[k] = std::bit_cast<float>(bits);
    }
    ar.put(t.at("name").get<std::string>(), shape, std::move(values));
  }
  return ar;
}

}  // namespace shadowbench
