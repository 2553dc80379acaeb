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

#ifndef GONSTAT_FUNDUS_PREPROC_HPP
#define GONSTAT_FUNDUS_PREPROC_HPP

#include <array>
#include <cstdint>

#include "gonstat/raster.hpp"
#include "gonstat/rng.hpp"

namespace gonstat {

// The circular field-of-view boundary fitted to a fundus photograph.
// Confidence is the fraction of rim pixels lying within 2% of the
// fitted radius; detection rejects fits below 0.8 or foreground
// components covering less than 10% of the image.
struct FundusMask {
  double cx = 0.0;
  double cy = 0.0;
  double diameter = 0.0;
  double confidence = 0.0;
};

// Every fundus is rescaled so its detected diameter lands here.
inline constexpr int kFundusDiameter = 587;

// Photometric augmentation limits.  Parameters outside these ranges are
// rejected with ParamOutOfRange.
inline constexpr double kMaxBrightnessDelta = 0.1147528;
inline constexpr double kMinSaturationFactor = 0.5597273;
inline constexpr double kMaxSaturationFactor = 1.2748845;
inline constexpr double kMaxHueDelta = 0.0251488;
inline constexpr double kMinContrastFactor = 0.9996807;
inline constexpr double kMaxContrastFactor = 1.7704824;

struct AugmentParams {
  double brightness_delta = 0.0;   // added per channel on the [0,1] scale
  double saturation_factor = 1.0;  // scales S in HSV
  double hue_delta = 0.0;          // fraction of a full hue revolution
  double contrast_factor = 1.0;    // scales about the per-channel mean
  // When eligible, each reflection is applied with probability 1/2 from
  // the seed (horizontal coin first).
  bool horizontal_flips = true;
  bool vertical_flips = true;
};

// Fits a circle to the rim of the brightest connected region: Otsu
// threshold over luminance, largest 4-connected component, least-squares
// circle on the component's interior boundary pixels.  Pixels on the
// image border never count as rim, so a partially cropped fundus is
// fitted (and its confidence judged) from the visible arc alone.
// Throws MaskNotFound when no usable foreground exists, the component
// is under 10% of the image, the rim is degenerate, or confidence falls
// below 0.8.
FundusMask detect_mask(const RasterImage& img);

// Uniformly rescales by kFundusDiameter / mask.diameter (bilinear),
// recentered on the mask center and cropped or zero-padded to a
// kFundusDiameter-square canvas.
RasterImage normalize_scale(const RasterImage& img, const FundusMask& mask);

// Brightness, saturation, hue, and contrast in that order, then the
// seeded reflections; channels clamp to range after each stage.  Stages
// at their identity value are skipped outright, so all-identity
// parameters with flips disabled reproduce the input exactly.
RasterImage augment(const RasterImage& img, const AugmentParams& params,
                    uint64_t seed);

// Uniform draw within the augmentation limits, flips left eligible.
AugmentParams sample_augment_params(SplitMix64& rng);

// Tiny synthetic fundus: an antialiased flat disc on a flat background,
// used to exercise detection and normalization against known geometry.
struct DiscSpec {
  int width = 0;
  int height = 0;
  double cx = 0.0;
  double cy = 0.0;
  double diameter = 0.0;
  std::array<uint8_t, 3> fg = {203, 110, 57};
  std::array<uint8_t, 3> bg = {0, 0, 0};
};

RasterImage synthetic_disc(const DiscSpec& spec);

}  // namespace gonstat

#endif  // GONSTAT_FUNDUS_PREPROC_HPP
