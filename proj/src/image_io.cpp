#include "rcnkit/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>

#include "rcnkit/errors.hpp"

namespace rcnkit {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f != nullptr) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::string& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw IoError("cannot open '" + path + "'");
  return f;
}

[[noreturn]] void png_error_fn(png_structp png, png_const_charp msg) {
  throw IoError(std::string("png: ") + msg + " ('" +
                static_cast<const char*>(png_get_error_ptr(png)) + "')");
}

void png_warn_fn(png_structp, png_const_charp) {}

// Decoded 16-bit-capable raster; bit_depth is 8 or 16, gray or RGB.
struct RawPng {
  int h = 0, w = 0, channels = 1, bit_depth = 8;
  std::vector<std::uint8_t> bytes;  // row-major; 16-bit samples big-endian
};

RawPng read_png_raw(const std::string& path, bool want16) {
  FilePtr f = open_file(path, "rb");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING,
                                           const_cast<char*>(path.c_str()), png_error_fn,
                                           png_warn_fn);
  if (png == nullptr) throw IoError("png: allocation failed");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("png: allocation failed");
  }
  RawPng out;
  try {
    png_init_io(png, f.get());
    png_read_info(png, info);

    png_set_palette_to_rgb(png);
    png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    png_set_strip_alpha(png);
    if (!want16) png_set_strip_16(png);

    png_read_update_info(png, info);
    out.w = static_cast<int>(png_get_image_width(png, info));
    out.h = static_cast<int>(png_get_image_height(png, info));
    out.bit_depth = png_get_bit_depth(png, info);
    out.channels = png_get_channels(png, info);
    if (out.channels != 1 && out.channels != 3)
      throw IoError("png: unsupported channel count " + std::to_string(out.channels) +
                    " in '" + path + "'");

    const std::size_t row_bytes = png_get_rowbytes(png, info);
    out.bytes.resize(row_bytes * static_cast<std::size_t>(out.h));
    std::vector<png_bytep> rows(static_cast<std::size_t>(out.h));
    for (int y = 0; y < out.h; ++y) rows[y] = out.bytes.data() + row_bytes * y;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
  } catch (...) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw;
  }
  png_destroy_read_struct(&png, &info, nullptr);
  return out;
}

void write_png_raw(const std::string& path, const RawPng& raw) {
  FilePtr f = open_file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING,
                                            const_cast<char*>(path.c_str()), png_error_fn,
                                            png_warn_fn);
  if (png == nullptr) throw IoError("png: allocation failed");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("png: allocation failed");
  }
  try {
    png_init_io(png, f.get());
    const int color = raw.channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY;
    png_set_IHDR(png, info, static_cast<png_uint_32>(raw.w), static_cast<png_uint_32>(raw.h),
                 raw.bit_depth, color, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    const std::size_t row_bytes =
        static_cast<std::size_t>(raw.w) * raw.channels * (raw.bit_depth / 8);
    std::vector<png_bytep> rows(static_cast<std::size_t>(raw.h));
    for (int y = 0; y < raw.h; ++y)
      rows[y] = const_cast<png_bytep>(raw.bytes.data() + row_bytes * y);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
  } catch (...) {
    png_destroy_write_struct(&png, &info);
    throw;
  }
  png_destroy_write_struct(&png, &info);
}

}  // namespace

ImageU8 load_png(const std::string& path) {
  RawPng raw = read_png_raw(path, /*want16=*/false);
  ImageU8 out;
  out.h = raw.h;
  out.w = raw.w;
  out.channels = raw.channels;
  out.pixels = std::move(raw.bytes);
  return out;
}

void save_png(const std::string& path, const ImageU8& image) {
  if (image.channels != 1 && image.channels != 3)
    throw IoError("save_png: expected 1 or 3 channels, got " + std::to_string(image.channels));
  RawPng raw;
  raw.h = image.h;
  raw.w = image.w;
  raw.channels = image.channels;
  raw.bit_depth = 8;
  raw.bytes = image.pixels;
  write_png_raw(path, raw);
}

void save_png16(const std::string& path, const ContourPrediction& pred) {
  RawPng raw;
  raw.h = pred.h;
  raw.w = pred.w;
  raw.channels = 1;
  raw.bit_depth = 16;
  raw.bytes.resize(pred.values.size() * 2);
  for (std::size_t i = 0; i < pred.values.size(); ++i) {
    const float v = std::clamp(pred.values[i], 0.0f, 1.0f);
    const auto q = static_cast<std::uint16_t>(std::lround(v * 65535.0f));
    raw.bytes[2 * i] = static_cast<std::uint8_t>(q >> 8);  // PNG samples are big-endian
    raw.bytes[2 * i + 1] = static_cast<std::uint8_t>(q & 0xff);
  }
  write_png_raw(path, raw);
}

ContourPrediction load_png16(const std::string& path) {
  RawPng raw = read_png_raw(path, /*want16=*/true);
  if (raw.channels != 1)
    throw IoError("load_png16: expected grayscale in '" + path + "'");
  ContourPrediction out = ContourPrediction::zeros(raw.h, raw.w);
  if (raw.bit_depth == 16) {
    for (std::size_t i = 0; i < out.values.size(); ++i) {
      const std::uint16_t q = static_cast<std::uint16_t>(raw.bytes[2 * i] << 8 |
                                                         raw.bytes[2 * i + 1]);
      out.values[i] = q / 65535.0f;
    }
  } else {
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = raw.bytes[i] / 255.0f;
  }
  return out;
}

void save_label_png(const std::string& path, const LabelMap& label) {
  ImageU8 img = ImageU8::filled(label.h, label.w, 1, 0);
  for (std::size_t i = 0; i < label.pixels.size(); ++i)
    img.pixels[i] = label.pixels[i] ? 255 : 0;
  save_png(path, img);
}

LabelMap load_label_png(const std::string& path) {
  ImageU8 img = load_png(path);
  LabelMap out = LabelMap::zeros(img.h, img.w);
  const std::size_t hw = out.pixels.size();
  for (std::size_t i = 0; i < hw; ++i)
    out.pixels[i] = img.pixels[i * img.channels] >= 128 ? 1 : 0;
  return out;
}

void save_pgm16(const std::string& path, const ContourPrediction& pred) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f << "P5\n" << pred.w << " " << pred.h << "\n65535\n";
  std::vector<std::uint8_t> buf(pred.values.size() * 2);
  for (std::size_t i = 0; i < pred.values.size(); ++i) {
    const float v = std::clamp(pred.values[i], 0.0f, 1.0f);
    const auto q = static_cast<std::uint16_t>(std::lround(v * 65535.0f));
    buf[2 * i] = static_cast<std::uint8_t>(q >> 8);  // maxval > 255: most significant first
    buf[2 * i + 1] = static_cast<std::uint8_t>(q & 0xff);
  }
  f.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!f) throw IoError("write failed for '" + path + "'");
}

ContourPrediction load_pgm16(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "'");
  std::string data((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

  std::size_t pos = 0;
  auto token = [&]() -> std::string {
    while (pos < data.size()) {
      if (std::isspace(static_cast<unsigned char>(data[pos]))) {
        ++pos;
      } else if (data[pos] == '#') {
        while (pos < data.size() && data[pos] != '\n') ++pos;
      } else {
        break;
      }
    }
    const std::size_t start = pos;
    while (pos < data.size() && !std::isspace(static_cast<unsigned char>(data[pos]))) ++pos;
    if (start == pos) throw IoError("pgm: truncated header in '" + path + "'");
    return data.substr(start, pos - start);
  };

  if (token() != "P5") throw IoError("pgm: not a binary PGM: '" + path + "'");
  const int w = std::stoi(token());
  const int h = std::stoi(token());
  const int maxval = std::stoi(token());
  if (w <= 0 || h <= 0) throw IoError("pgm: bad dimensions in '" + path + "'");
  if (maxval != 65535)
    throw IoError("pgm: expected maxval 65535, got " + std::to_string(maxval) + " in '" +
                  path + "'");
  ++pos;  // single whitespace byte separates header from samples
  const std::size_t need = static_cast<std::size_t>(w) * h * 2;
  if (data.size() - pos < need) throw IoError("pgm: truncated pixel data in '" + path + "'");

  ContourPrediction out = ContourPrediction::zeros(h, w);
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    const auto hi = static_cast<std::uint8_t>(data[pos + 2 * i]);
    const auto lo = static_cast<std::uint8_t>(data[pos + 2 * i + 1]);
    out.values[i] = static_cast<std::uint16_t>(hi << 8 | lo) / 65535.0f;
  }
  return out;
}

namespace {

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(),
                                                suffix) == 0;
}

}  // namespace

void save_prediction(const std::string& path, const ContourPrediction& pred) {
  if (ends_with(path, ".png"))
    save_png16(path, pred);
  else if (ends_with(path, ".pgm"))
    save_pgm16(path, pred);
  else
    throw IoError("save_prediction: unsupported extension in '" + path + "'");
}

ContourPrediction load_prediction(const std::string& path) {
  if (ends_with(path, ".png")) return load_png16(path);
  if (ends_with(path, ".pgm")) return load_pgm16(path);
  throw IoError("load_prediction: unsupported extension in '" + path + "'");
}

}  // namespace rcnkit
