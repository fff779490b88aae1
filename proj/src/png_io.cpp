#include "shadowbench/png_io.hpp"

#include <png.h>

#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <memory>
#include <vector>

namespace shadowbench {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const noexcept {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

struct RawPng {
  int height = 0;
  int width = 0;
  int channels = 0;  // after transforms: 1 (gray), 3 (rgb)
  int bit_depth = 0;
  std::vector<unsigned char> bytes;
  std::string error;
  bool bad_depth = false;
};

void png_error_sink(png_structp png, png_const_charp msg) {
  auto* raw = static_cast<RawPng*>(png_get_error_ptr(png));
  raw->error = msg ? msg : "unknown libpng error";
  png_longjmp(png, 1);
}

void png_warning_sink(png_structp, png_const_charp) {}

// No C++ objects are created or resized between setjmp and the last libpng
// call; all buffers live in *raw, which outlives the jump.
bool decode_png(std::FILE* fp, RawPng* raw) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, raw, png_error_sink, png_warning_sink);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    return false;
  }
  std::vector<png_bytep>* rows = new std::vector<png_bytep>();
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    delete rows;
    return false;
  }
  png_init_io(png, fp);
  png_read_info(png, info);
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) {
    png_set_palette_to_rgb(png);
  } else if (depth != 8 && depth != 16) {
    raw->bad_depth = true;
    raw->bit_depth = depth;
    png_destroy_read_struct(&png, &info, nullptr);
    delete rows;
    return false;
  }
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  if (depth == 16) png_set_swap(png);  // little-endian uint16 in memory
  png_read_update_info(png, info);

  raw->height = static_cast<int>(png_get_image_height(png, info));
  raw->width = static_cast<int>(png_get_image_width(png, info));
  raw->channels = png_get_channels(png, info);
  raw->bit_depth = png_get_bit_depth(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);
  raw->bytes.resize(stride * raw->height);
  rows->resize(raw->height);
  for (int y = 0; y < raw->height; ++y) (*rows)[y] = raw->bytes.data() + stride * y;
  png_read_image(png, rows->data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  delete rows;
  return true;
}

RawPng read_png(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec))
    throw IoError(IoErrorKind::missing_file, "no such image file: " + path.string());
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw IoError(IoErrorKind::missing_file, "cannot open image file: " + path.string());

  unsigned char sig[8] = {};
  if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0)
    throw IoError(IoErrorKind::unsupported_format, "not a PNG file: " + path.string());
  std::rewind(fp.get());

  RawPng raw;
  if (!decode_png(fp.get(), &raw)) {
    if (raw.bad_depth)
      throw IoError(IoErrorKind::unsupported_bit_depth,
                    "unsupported PNG bit depth " + std::to_string(raw.bit_depth) + ": " + path.string());
    throw IoError(IoErrorKind::corrupt_stream, "corrupt PNG stream (" + raw.error + "): " + path.string());
  }
  return raw;
}

double sample(const RawPng& raw, std::size_t i) {
  if (raw.bit_depth == 16) {
    const unsigned lo = raw.bytes[2 * i], hi = raw.bytes[2 * i + 1];
    return static_cast<double>(lo | (hi << 8)) / 65535.0;
  }
  return static_cast<double>(raw.bytes[i]) / 255.0;
}

void write_png(const std::filesystem::path& path, int height, int width, int channels, int bit_depth,
               const std::vector<unsigned char>& bytes) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw IoError(IoErrorKind::write_failed, "cannot write image file: " + path.string());
  RawPng status;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &status, png_error_sink, png_warning_sink);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError(IoErrorKind::write_failed, "libpng allocation failed");
  }
  const std::size_t stride = static_cast<std::size_t>(width) * channels * (bit_depth / 8);
  std::vector<png_bytep> rows(height);
  for (int y = 0; y < height; ++y) rows[y] = const_cast<unsigned char*>(bytes.data()) + stride * y;
  volatile bool ok = false;
  if (!setjmp(png_jmpbuf(png))) {
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, width, height, bit_depth, channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    if (bit_depth == 16) png_set_swap(png);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    ok = true;
  }
  png_destroy_write_struct(&png, &info);
  if (!ok) throw IoError(IoErrorKind::write_failed, "PNG write failed (" + status.error + "): " + path.string());
  if (std::fflush(fp.get()) != 0)
    throw IoError(IoErrorKind::write_failed, "PNG flush failed: " + path.string());
}

unsigned quantize(double v, double max_code) {
  return static_cast<unsigned>(std::clamp(std::round(v * max_code), 0.0, max_code));
}

}  // namespace

Image load_image(const std::filesystem::path& path) {
  const RawPng raw = read_png(path);
  Image img(raw.height, raw.width);
  const std::size_t n = img.pixels();
  for (std::size_t p = 0; p < n; ++p) {
    for (int c = 0; c < 3; ++c) {
      const int src = raw.channels == 1 ? 0 : c;
      img[3 * p + c] = sample(raw, p * raw.channels + src);
    }
  }
  return img;
}

ScalarField load_field(const std::filesystem::path& path, FieldRole role) {
  const RawPng raw = read_png(path);
  ScalarField field(raw.height, raw.width, 0.0, role);
  const std::size_t n = field.pixels();
  for (std::size_t p = 0; p < n; ++p) {
    double acc = 0.0;
    for (int c = 0; c < raw.channels; ++c) acc += sample(raw, p * raw.channels + c);
    field[p] = acc / raw.channels;
  }
  return field;
}

void save_image(const Image& img, const std::filesystem::path& path) {
  std::vector<unsigned char> bytes(img.size());
  for (std::size_t i = 0; i < img.size(); ++i) bytes[i] = static_cast<unsigned char>(quantize(img[i], 255.0));
  write_png(path, img.height(), img.width(), 3, 8, bytes);
}

void save_image16(const Image& img, const std::filesystem::path& path) {
  std::vector<unsigned char> bytes(img.size() * 2);
  for (std::size_t i = 0; i < img.size(); ++i) {
    const unsigned q = quantize(img[i], 65535.0);
    bytes[2 * i] = static_cast<unsigned char>(q & 0xff);
    bytes[2 * i + 1] = static_cast<unsigned char>(q >> 8);
  }
  write_png(path, img.height(), img.width(), 3, 16, bytes);
}

void save_field(const ScalarField& field, const std::filesystem::path& path) {
  std::vector<unsigned char> bytes(field.size());
  for (std::size_t i = 0; i < field.size(); ++i) bytes[i] = static_cast<unsigned char>(quantize(field[i], 255.0));
  write_png(path, field.height(), field.width(), 1, 8, bytes);
}

}  // namespace shadowbench
