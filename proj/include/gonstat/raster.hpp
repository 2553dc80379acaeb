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

#ifndef GONSTAT_RASTER_HPP
#define GONSTAT_RASTER_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace gonstat {

// Row-major 8-bit RGB raster.
struct RasterImage {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> pixels;  // 3 bytes per pixel

  // Throws ShapeMismatch unless both dimensions are positive and the
  // pixel buffer holds exactly width * height * 3 bytes.
  void validate() const;

  size_t offset(int x, int y) const {
    return 3 * (static_cast<size_t>(y) * static_cast<size_t>(width) +
                static_cast<size_t>(x));
  }
  const uint8_t* at(int x, int y) const {
    return pixels.data() + offset(x, y);
  }
  uint8_t* at(int x, int y) { return pixels.data() + offset(x, y); }

  bool operator==(const RasterImage& o) const {
    return width == o.width && height == o.height && pixels == o.pixels;
  }
};

RasterImage make_canvas(int width, int height, std::array<uint8_t, 3> fill);

// File I/O: PNG (any color layout, flattened to 8-bit RGB on read) and
// binary PPM (P6, maxval 255).  The reader dispatches on the file's
// magic bytes, the writer on the extension (.png or .ppm).  Throws
// IoError when the file cannot be opened and SchemaError on a payload
// that does not parse.
RasterImage read_raster(const std::string& path);
void write_raster(const std::string& path, const RasterImage& img);

}  // namespace gonstat

#endif  // GONSTAT_RASTER_HPP
