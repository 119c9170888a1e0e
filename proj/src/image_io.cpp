#include "sinr/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <stdexcept>
#include <vector>

namespace sinr {

namespace {

struct FileCloser {
  std::FILE* f = nullptr;
  ~FileCloser() {
    if (f) std::fclose(f);
  }
};

}  // namespace

Grid2D load_png(const std::string& path) {
  FileCloser fc;
  fc.f = std::fopen(path.c_str(), "rb");
  if (!fc.f) throw std::runtime_error("load_png: cannot open " + path);

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("load_png: png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw std::runtime_error("load_png: png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("load_png: failed to decode " + path);
  }

  png_init_io(png, fc.f);
  png_read_png(png, info,
               PNG_TRANSFORM_STRIP_16 | PNG_TRANSFORM_PACKING | PNG_TRANSFORM_EXPAND, nullptr);

  const png_uint_32 width = png_get_image_width(png, info);
  const png_uint_32 height = png_get_image_height(png, info);
  const png_byte color = png_get_color_type(png, info);
  const int file_channels = png_get_channels(png, info);
  const bool has_alpha = color == PNG_COLOR_TYPE_GRAY_ALPHA || color == PNG_COLOR_TYPE_RGB_ALPHA;
  const int channels = has_alpha ? file_channels - 1 : file_channels;
  if (channels != 1 && channels != 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("load_png: unsupported channel layout in " + path);
  }
  if (has_alpha)
    std::cerr << "load_png: dropping alpha channel of " << path << "\n";

  png_bytepp rows = png_get_rows(png, info);
  Grid2D img(static_cast<int>(height), static_cast<int>(width), channels);
  for (png_uint_32 r = 0; r < height; ++r) {
    const png_bytep row = rows[r];
    for (png_uint_32 c = 0; c < width; ++c)
      for (int ch = 0; ch < channels; ++ch)
        img(static_cast<int>(r), static_cast<int>(c), ch) =
            row[c * file_channels + ch] / 255.0;
  }
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

void save_png(const Grid2D& img, const std::string& path) {
  if (img.channels() != 1 && img.channels() != 3)
    throw std::invalid_argument("save_png: 1- or 3-channel images only");
  if (img.rows() < 1 || img.cols() < 1) throw std::invalid_argument("save_png: empty image");

  FileCloser fc;
  fc.f = std::fopen(path.c_str(), "wb");
  if (!fc.f) throw std::runtime_error("save_png: cannot open " + path);

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("save_png: png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw std::runtime_error("save_png: png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("save_png: failed to encode " + path);
  }

  png_init_io(png, fc.f);
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.cols()),
               static_cast<png_uint_32>(img.rows()), 8,
               img.channels() == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);

  std::vector<png_byte> buf(static_cast<std::size_t>(img.rows()) * img.cols() * img.channels());
  std::vector<png_bytep> rows(static_cast<std::size_t>(img.rows()));
  for (int r = 0; r < img.rows(); ++r) {
    rows[r] = buf.data() + static_cast<std::size_t>(r) * img.cols() * img.channels();
    for (int c = 0; c < img.cols(); ++c)
      for (int ch = 0; ch < img.channels(); ++ch) {
        const double v = std::clamp(img(r, c, ch), 0.0, 1.0);
        rows[r][c * img.channels() + ch] = static_cast<png_byte>(std::floor(v * 255.0 + 0.5));
      }
  }
  png_set_rows(png, info, rows.data());
  png_write_png(png, info, PNG_TRANSFORM_IDENTITY, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace sinr
