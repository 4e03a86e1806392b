#pragma once

#include <png.h>

#include <cstdio>
#include <string>
#include <vector>

#include "lrf/common.hpp"
#include "lrf/image.hpp"

namespace lrf {
namespace detail {

// libpng reports errors through longjmp, which must not cross C++ objects
// with destructors. The impl functions below therefore keep only trivial
// locals; buffers live in the caller and the contexts clean up in their
// destructors after the jump.

struct PngRead {
  FILE* fp = nullptr;
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngRead() {
    if (png) png_destroy_read_struct(&png, &info, nullptr);
    if (fp) std::fclose(fp);
  }
};

struct PngWrite {
  FILE* fp = nullptr;
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngWrite() {
    if (png) png_destroy_write_struct(&png, &info);
    if (fp) std::fclose(fp);
  }
};

inline bool read_png_impl(PngRead& c, ImageU8& out,
                          std::vector<png_bytep>& rows) {
  if (setjmp(png_jmpbuf(c.png))) return false;
  png_init_io(c.png, c.fp);
  png_read_info(c.png, c.info);
  const png_uint_32 w = png_get_image_width(c.png, c.info);
  const png_uint_32 h = png_get_image_height(c.png, c.info);
  const int colour = png_get_color_type(c.png, c.info);
  const int depth = png_get_bit_depth(c.png, c.info);
  if (w == 0 || h == 0) return false;
  // Normalize every input to 8-bit RGB.
  if (colour == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(c.png);
  if (colour == PNG_COLOR_TYPE_GRAY && depth < 8) {
    png_set_expand_gray_1_2_4_to_8(c.png);
  }
  if (png_get_valid(c.png, c.info, PNG_INFO_tRNS)) {
    png_set_tRNS_to_alpha(c.png);
  }
  if (depth == 16) png_set_strip_16(c.png);
  if (colour == PNG_COLOR_TYPE_GRAY || colour == PNG_COLOR_TYPE_GRAY_ALPHA) {
    png_set_gray_to_rgb(c.png);
  }
  png_set_strip_alpha(c.png);
  png_read_update_info(c.png, c.info);
  if (png_get_rowbytes(c.png, c.info) != 3 * w) return false;
  out = ImageU8(static_cast<std::int64_t>(w), static_cast<std::int64_t>(h));
  rows.resize(h);
  for (png_uint_32 y = 0; y < h; ++y) rows[y] = out.px(y, 0);
  png_read_image(c.png, rows.data());
  png_read_end(c.png, nullptr);
  return true;
}

inline bool write_png_impl(PngWrite& c, const ImageU8& img,
                           std::vector<png_bytep>& rows) {
  if (setjmp(png_jmpbuf(c.png))) return false;
  png_init_io(c.png, c.fp);
  png_set_IHDR(c.png, c.info, static_cast<png_uint_32>(img.w),
               static_cast<png_uint_32>(img.h), 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(c.png, c.info);
  rows.resize(img.h);
  for (std::int64_t y = 0; y < img.h; ++y) {
    rows[y] = const_cast<png_bytep>(img.px(y, 0));
  }
  png_write_image(c.png, rows.data());
  png_write_end(c.png, nullptr);
  return true;
}

}  // namespace detail

inline ImageU8 read_png(const std::string& path) {
  detail::PngRead c;
  c.fp = std::fopen(path.c_str(), "rb");
  if (!c.fp) throw IoError("cannot open " + path);
  c.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr,
                                 nullptr);
  if (c.png) c.info = png_create_info_struct(c.png);
  if (!c.png || !c.info) throw IoError("libpng initialization failed");
  ImageU8 out;
  std::vector<png_bytep> rows;
  if (!detail::read_png_impl(c, out, rows)) {
    throw IoError("failed to decode PNG: " + path);
  }
  return out;
}

inline void write_png(const std::string& path, const ImageU8& img) {
  config_check(img.w >= 1 && img.h >= 1, "write_png: empty image");
  detail::PngWrite c;
  c.fp = std::fopen(path.c_str(), "wb");
  if (!c.fp) throw IoError("cannot open for writing: " + path);
  c.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr,
                                  nullptr);
  if (c.png) c.info = png_create_info_struct(c.png);
  if (!c.png || !c.info) throw IoError("libpng initialization failed");
  std::vector<png_bytep> rows;
  if (!detail::write_png_impl(c, img, rows)) {
    throw IoError("failed to encode PNG: " + path);
  }
}

}  // namespace lrf
