// Copyright 2026 The GonStat Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "gonstat/raster.hpp"

#include <png.h>

#include <cctype>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "gonstat/errors.hpp"

namespace gonstat {

namespace {

// libpng reports errors through longjmp; everything that owns a
// destructor stays outside the setjmp region.
struct PngReader {
  FILE* file = nullptr;
  png_structp png = nullptr;
  png_infop info = nullptr;

  ~PngReader() {
    if (png != nullptr) {
      png_destroy_read_struct(&png, info != nullptr ? &info : nullptr,
                              nullptr);
    }
    if (file != nullptr) std::fclose(file);
  }
};

struct PngWriter {
  FILE* file = nullptr;
  png_structp png = nullptr;
  png_infop info = nullptr;

  ~PngWriter() {
    if (png != nullptr) {
      png_destroy_write_struct(&png, info != nullptr ? &info : nullptr);
    }
    if (file != nullptr) std::fclose(file);
  }
};

RasterImage read_png(const std::string& path) {
  PngReader r;
  r.file = std::fopen(path.c_str(), "rb");
  if (r.file == nullptr) {
    throw IoError("cannot open " + path);
  }
  r.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr,
                                 nullptr);
  if (r.png == nullptr) {
    throw IoError("png reader allocation failed for " + path);
  }
  r.info = png_create_info_struct(r.png);
  if (r.info == nullptr) {
    throw IoError("png info allocation failed for " + path);
  }

  RasterImage img;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(r.png))) {
    throw SchemaError("malformed PNG: " + path);
  }
  png_init_io(r.png, r.file);
  png_read_info(r.png, r.info);

  png_uint_32 w = png_get_image_width(r.png, r.info);
  png_uint_32 h = png_get_image_height(r.png, r.info);
  int color = png_get_color_type(r.png, r.info);
  int depth = png_get_bit_depth(r.png, r.info);

  // Flatten every layout to 8-bit RGB.
  if (depth == 16) png_set_strip_16(r.png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(r.png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) {
    png_set_expand_gray_1_2_4_to_8(r.png);
  }
  if (png_get_valid(r.png, r.info, PNG_INFO_tRNS)) {
    png_set_tRNS_to_alpha(r.png);
  }
  if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) {
    png_set_gray_to_rgb(r.png);
  }
  png_set_strip_alpha(r.png);
  png_read_update_info(r.png, r.info);

  img.width = static_cast<int>(w);
  img.height = static_cast<int>(h);
  img.pixels.resize(static_cast<size_t>(w) * h * 3);
  rows.resize(h);
  for (png_uint_32 y = 0; y < h; ++y) {
    rows[y] = img.pixels.data() + static_cast<size_t>(y) * w * 3;
  }
  png_read_image(r.png, rows.data());
  png_read_end(r.png, nullptr);
  return img;
}

void write_png(const std::string& path, const RasterImage& img) {
  PngWriter w;
  w.file = std::fopen(path.c_str(), "wb");
  if (w.file == nullptr) {
    throw IoError("cannot write " + path);
  }
  w.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr,
                                  nullptr);
  if (w.png == nullptr) {
    throw IoError("png writer allocation failed for " + path);
  }
  w.info = png_create_info_struct(w.png);
  if (w.info == nullptr) {
    throw IoError("png info allocation failed for " + path);
  }

  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(w.png))) {
    throw IoError("png write failed for " + path);
  }
  png_init_io(w.png, w.file);
  png_set_IHDR(w.png, w.info, static_cast<png_uint_32>(img.width),
               static_cast<png_uint_32>(img.height), 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(w.png, w.info);
  rows.resize(static_cast<size_t>(img.height));
  for (int y = 0; y < img.height; ++y) {
    rows[static_cast<size_t>(y)] = const_cast<png_bytep>(img.at(0, y));
  }
  png_write_image(w.png, rows.data());
  png_write_end(w.png, nullptr);
}

// One whitespace-delimited PPM header token, '#' comments skipped.
long ppm_token(std::istream& in, const std::string& path) {
  for (;;) {
    int c = in.peek();
    if (c == EOF) throw SchemaError("truncated PPM header: " + path);
    if (c == '#') {
      std::string comment;
      std::getline(in, comment);
      continue;
    }
    if (std::isspace(c)) {
      in.get();
      continue;
    }
    break;
  }
  long value = 0;
  if (!(in >> value)) {
    throw SchemaError("non-numeric PPM header field: " + path);
  }
  return value;
}

RasterImage read_ppm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (!in || magic[0] != 'P' || magic[1] != '6') {
    throw SchemaError("not a binary PPM: " + path);
  }
  long w = ppm_token(in, path);
  long h = ppm_token(in, path);
  long maxval = ppm_token(in, path);
  if (w <= 0 || h <= 0) {
    throw SchemaError("PPM dimensions out of range: " + path);
  }
  if (maxval != 255) {
    throw SchemaError("PPM maxval must be 255: " + path);
  }
  in.get();  // single whitespace byte before the raster

  RasterImage img;
  img.width = static_cast<int>(w);
  img.height = static_cast<int>(h);
  img.pixels.resize(static_cast<size_t>(w) * static_cast<size_t>(h) * 3);
  in.read(reinterpret_cast<char*>(img.pixels.data()),
          static_cast<std::streamsize>(img.pixels.size()));
  if (static_cast<size_t>(in.gcount()) != img.pixels.size()) {
    throw SchemaError("truncated PPM raster: " + path);
  }
  return img;
}

void write_ppm(const std::string& path, const RasterImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "P6\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
  if (!out) throw IoError("short write to " + path);
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

void RasterImage::validate() const {
  if (width <= 0 || height <= 0) {
    throw ShapeMismatch("raster dimensions must be positive, got " +
                        std::to_string(width) + "x" + std::to_string(height));
  }
  size_t expected =
      static_cast<size_t>(width) * static_cast<size_t>(height) * 3;
  if (pixels.size() != expected) {
    throw ShapeMismatch("raster holds " + std::to_string(pixels.size()) +
                        " bytes, dimensions demand " +
                        std::to_string(expected));
  }
}

RasterImage make_canvas(int width, int height, std::array<uint8_t, 3> fill) {
  if (width <= 0 || height <= 0) {
    throw ShapeMismatch("canvas dimensions must be positive");
  }
  RasterImage img;
  img.width = width;
  img.height = height;
  img.pixels.resize(static_cast<size_t>(width) * static_cast<size_t>(height) *
                    3);
  for (size_t i = 0; i < img.pixels.size(); i += 3) {
    img.pixels[i] = fill[0];
    img.pixels[i + 1] = fill[1];
    img.pixels[i + 2] = fill[2];
  }
  return img;
}

RasterImage read_raster(const std::string& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw IoError("cannot open " + path);
  unsigned char magic[8] = {};
  probe.read(reinterpret_cast<char*>(magic), 8);
  size_t got = static_cast<size_t>(probe.gcount());
  probe.close();

  if (got >= 8 && png_sig_cmp(magic, 0, 8) == 0) return read_png(path);
  if (got >= 2 && magic[0] == 'P' && magic[1] == '6') return read_ppm(path);
  throw SchemaError("unrecognized raster format: " + path);
}

void write_raster(const std::string& path, const RasterImage& img) {
  img.validate();
  if (ends_with(path, ".png")) {
    write_png(path, img);
  } else if (ends_with(path, ".ppm")) {
    write_ppm(path, img);
  } else {
    throw IoError("unsupported raster extension (want .png or .ppm): " +
                  path);
  }
}

}  // namespace gonstat
