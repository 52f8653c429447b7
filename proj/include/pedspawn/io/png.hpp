#ifndef PEDSPAWN_IO_PNG_HPP
#define PEDSPAWN_IO_PNG_HPP

// libpng wrappers for the three pixel formats the pipeline touches: 8-bit RGB,
// 8-bit gray and 16-bit gray. Writes are deterministic (fixed zlib settings,
// no timestamp chunk), so equal pixels always produce equal file bytes.

#include <png.h>

#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "pedspawn/error.hpp"
#include "pedspawn/raster.hpp"

namespace pedspawn::io {

struct PngPixels {
  int width = 0;
  int height = 0;
  int channels = 0;       ///< 1 gray, 2 gray+alpha, 3 rgb, 4 rgba
  int bit_depth = 8;      ///< 8 or 16
  std::vector<std::uint16_t> samples;  ///< row-major, interleaved
};

namespace detail {

struct PngErrorSink {
  std::jmp_buf jump;
  char message[256] = {0};
};

inline void png_error_fn(png_structp png, png_const_charp msg) {
  auto* sink = static_cast<PngErrorSink*>(png_get_error_ptr(png));
  std::snprintf(sink->message, sizeof(sink->message), "%s", msg);
  std::longjmp(sink->jump, 1);
}

inline void png_warning_fn(png_structp, png_const_charp) {}

struct File {
  std::FILE* f = nullptr;
  ~File() {
    if (f) std::fclose(f);
  }
};

}  // namespace detail

inline PngPixels read_png(const std::filesystem::path& path) {
  detail::File file;
  file.f = std::fopen(path.c_str(), "rb");
  if (!file.f) throw DataError("cannot open PNG for reading: " + path.string());

  detail::PngErrorSink sink;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &sink, detail::png_error_fn, detail::png_warning_fn);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError("libpng initialisation failed");
  }
  PngPixels out;
  std::vector<png_byte> buffer;
  std::vector<png_bytep> rows;
  if (setjmp(sink.jump)) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError("PNG decode error in " + path.string() + ": " + sink.message);
  }
  png_init_io(png, file.f);
  png_read_info(png, info);
  const auto color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_interlace_handling(png);
  png_read_update_info(png, info);

  out.width = static_cast<int>(png_get_image_width(png, info));
  out.height = static_cast<int>(png_get_image_height(png, info));
  out.channels = png_get_channels(png, info);
  out.bit_depth = png_get_bit_depth(png, info);
  const std::size_t row_bytes = png_get_rowbytes(png, info);
  buffer.resize(row_bytes * static_cast<std::size_t>(out.height));
  rows.resize(static_cast<std::size_t>(out.height));
  for (int y = 0; y < out.height; ++y) rows[y] = buffer.data() + row_bytes * y;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  const std::size_t n = static_cast<std::size_t>(out.width) * out.height * out.channels;
  out.samples.resize(n);
  if (out.bit_depth == 16) {
    for (std::size_t i = 0; i < n; ++i) out.samples[i] = static_cast<std::uint16_t>((buffer[2 * i] << 8) | buffer[2 * i + 1]);
  } else {
    for (std::size_t i = 0; i < n; ++i) out.samples[i] = buffer[i];
  }
  return out;
}

/// channels in {1, 3}; bit_depth in {8, 16}.
inline void write_png(const std::filesystem::path& path, const PngPixels& px) {
  if (px.channels != 1 && px.channels != 3) throw std::invalid_argument("write_png: unsupported channel count");
  if (px.bit_depth != 8 && px.bit_depth != 16) throw std::invalid_argument("write_png: unsupported bit depth");
  const int bytes_per_sample = px.bit_depth / 8;
  const std::size_t row_bytes = static_cast<std::size_t>(px.width) * px.channels * bytes_per_sample;
  std::vector<png_byte> buffer(row_bytes * static_cast<std::size_t>(px.height));
  for (std::size_t i = 0; i < px.samples.size(); ++i) {
    if (bytes_per_sample == 2) {
      buffer[2 * i] = static_cast<png_byte>(px.samples[i] >> 8);
      buffer[2 * i + 1] = static_cast<png_byte>(px.samples[i] & 0xFF);
    } else {
      buffer[i] = static_cast<png_byte>(px.samples[i]);
    }
  }
  std::vector<png_bytep> rows(static_cast<std::size_t>(px.height));
  for (int y = 0; y < px.height; ++y) rows[y] = buffer.data() + row_bytes * y;

  detail::File file;
  file.f = std::fopen(path.c_str(), "wb");
  if (!file.f) throw DataError("cannot open PNG for writing: " + path.string());
  detail::PngErrorSink sink;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &sink, detail::png_error_fn, detail::png_warning_fn);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw DataError("libpng initialisation failed");
  }
  if (setjmp(sink.jump)) {
    png_destroy_write_struct(&png, &info);
    throw DataError("PNG encode error in " + path.string() + ": " + sink.message);
  }
  png_init_io(png, file.f);
  png_set_compression_level(png, 6);
  png_set_IHDR(png, info, static_cast<png_uint_32>(px.width), static_cast<png_uint_32>(px.height), px.bit_depth,
               px.channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  if (std::fflush(file.f) != 0 || std::ferror(file.f)) throw DataError("write failed: " + path.string());
}

inline RgbImage read_rgb_png(const std::filesystem::path& path) {
  const auto px = read_png(path);
  RgbImage img(px.width, px.height);
  const int shift = px.bit_depth == 16 ? 8 : 0;
  auto out = img.pixels();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::uint16_t* s = &px.samples[i * px.channels];
    if (px.channels >= 3) {
      out[i] = {static_cast<std::uint8_t>(s[0] >> shift), static_cast<std::uint8_t>(s[1] >> shift),
                static_cast<std::uint8_t>(s[2] >> shift)};
    } else {
      const auto g = static_cast<std::uint8_t>(s[0] >> shift);
      out[i] = {g, g, g};
    }
  }
  return img;
}

inline void write_rgb_png(const std::filesystem::path& path, const RgbImage& img) {
  PngPixels px{img.width(), img.height(), 3, 8, {}};
  px.samples.reserve(img.size() * 3);
  for (const auto& p : img.pixels()) px.samples.insert(px.samples.end(), {p[0], p[1], p[2]});
  write_png(path, px);
}

/// Single-channel read; rejects colour images and, for 8-bit targets, 16-bit files.
template <typename RasterT>
RasterT read_gray_png(const std::filesystem::path& path) {
  using T = typename RasterT::value_type;
  const auto px = read_png(path);
  if (px.channels > 2) throw DataError("expected a grayscale PNG: " + path.string());
  if (sizeof(T) == 1 && px.bit_depth == 16) throw DataError("expected an 8-bit PNG: " + path.string());
  RasterT img(px.width, px.height);
  auto out = img.pixels();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<T>(px.samples[i * px.channels]);
  return img;
}

template <typename RasterT>
void write_gray_png(const std::filesystem::path& path, const RasterT& img) {
  using T = typename RasterT::value_type;
  static_assert(sizeof(T) <= 2, "gray PNGs hold at most 16 bits");
  PngPixels px{img.width(), img.height(), 1, sizeof(T) == 2 ? 16 : 8, {}};
  px.samples.assign(img.pixels().begin(), img.pixels().end());
  write_png(path, px);
}

}  // namespace pedspawn::io

#endif  // PEDSPAWN_IO_PNG_HPP
