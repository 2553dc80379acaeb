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

#include "gonstat/fundus_preproc.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "gonstat/errors.hpp"

namespace gonstat {

namespace {

constexpr double kRimTolerance = 0.02;     // of the fitted radius
constexpr double kMinConfidence = 0.8;
constexpr double kMinAreaFraction = 0.10;
constexpr size_t kMinRimPixels = 8;
// Rim pixel centers sit about half a pixel inside the true edge, so the
// raw fit reads the radius low by that much at every size.
constexpr double kRimHalfPixel = 0.45;
// normalize_scale verifies its output by re-detection and refines the
// scale until the measured diameter is this close to the target.
constexpr double kNormalizeTolerance = 0.5;
constexpr int kNormalizePasses = 4;

// Rec.601 integer luma, rounded.
uint8_t luma(const uint8_t* p) {
  return static_cast<uint8_t>(
      (299 * p[0] + 587 * p[1] + 114 * p[2] + 500) / 1000);
}

// Otsu's threshold over a 256-bin histogram: foreground is lum > t.
// Returns -1 when the histogram has a single occupied bin.
int otsu_threshold(const std::array<long, 256>& hist, long total) {
  double sum_all = 0.0;
  int occupied = 0;
  for (int v = 0; v < 256; ++v) {
    if (hist[static_cast<size_t>(v)] > 0) ++occupied;
    sum_all += static_cast<double>(v) * hist[static_cast<size_t>(v)];
  }
  if (occupied < 2) return -1;

  double best_var = -1.0;
  int best_t = 0;
  long w0 = 0;
  double sum0 = 0.0;
  for (int t = 0; t < 255; ++t) {
    w0 += hist[static_cast<size_t>(t)];
    sum0 += static_cast<double>(t) * hist[static_cast<size_t>(t)];
    long w1 = total - w0;
    if (w0 == 0 || w1 == 0) continue;
    double mu0 = sum0 / w0;
    double mu1 = (sum_all - sum0) / w1;
    double var = static_cast<double>(w0) * static_cast<double>(w1) *
                 (mu0 - mu1) * (mu0 - mu1);
    if (var > best_var) {
      best_var = var;
      best_t = t;
    }
  }
  return best_t;
}

struct CircleFit {
  double cx = 0.0;
  double cy = 0.0;
  double r = 0.0;
  bool ok = false;
};

// Least-squares circle: x^2 + y^2 = A x + B y + C solved by 3x3 normal
// equations (Kasa's method).
CircleFit fit_circle(const std::vector<std::pair<int, int>>& pts) {
  double m[3][4] = {};
  for (const auto& [xi, yi] : pts) {
    double x = xi;
    double y = yi;
    double z = x * x + y * y;
    m[0][0] += x * x;
    m[0][1] += x * y;
    m[0][2] += x;
    m[0][3] += x * z;
    m[1][1] += y * y;
    m[1][2] += y;
    m[1][3] += y * z;
    m[2][3] += z;
  }
  m[1][0] = m[0][1];
  m[2][0] = m[0][2];
  m[2][1] = m[1][2];
  m[2][2] = static_cast<double>(pts.size());

  double scale = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) scale = std::max(scale, std::fabs(m[i][j]));
  }
  CircleFit fit;
  for (int col = 0; col < 3; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 3; ++r) {
      if (std::fabs(m[r][col]) > std::fabs(m[pivot][col])) pivot = r;
    }
    if (std::fabs(m[pivot][col]) <= scale * 1e-12) return fit;  // collinear
    if (pivot != col) std::swap(m[pivot], m[col]);
    for (int r = 0; r < 3; ++r) {
      if (r == col) continue;
      double f = m[r][col] / m[col][col];
      for (int j = col; j < 4; ++j) m[r][j] -= f * m[col][j];
    }
  }
  double a = m[0][3] / m[0][0] / 2.0;
  double b = m[1][3] / m[1][1] / 2.0;
  double r2 = m[2][3] / m[2][2] + a * a + b * b;
  if (!(r2 > 0.0)) return fit;
  fit.cx = a;
  fit.cy = b;
  fit.r = std::sqrt(r2);
  fit.ok = true;
  return fit;
}

// Bilinear tap with black outside the image.  Near-integer coordinates
// snap so a unit-scale resample copies pixels exactly.
void sample_bilinear(const RasterImage& img, double x, double y,
                     uint8_t* dst) {
  constexpr double kSnap = 1e-9;
  double fx = std::floor(x);
  double fy = std::floor(y);
  double wx = x - fx;
  double wy = y - fy;
  if (wx < kSnap) {
    wx = 0.0;
  } else if (wx > 1.0 - kSnap) {
    wx = 0.0;
    fx += 1.0;
  }
  if (wy < kSnap) {
    wy = 0.0;
  } else if (wy > 1.0 - kSnap) {
    wy = 0.0;
    fy += 1.0;
  }
  int x0 = static_cast<int>(fx);
  int y0 = static_cast<int>(fy);

  double acc[3] = {0.0, 0.0, 0.0};
  const double w00 = (1.0 - wx) * (1.0 - wy);
  const double w10 = wx * (1.0 - wy);
  const double w01 = (1.0 - wx) * wy;
  const double w11 = wx * wy;
  auto tap = [&](int px, int py, double w) {
    if (w == 0.0 || px < 0 || py < 0 || px >= img.width || py >= img.height) {
      return;
    }
    const uint8_t* p = img.at(px, py);
    acc[0] += w * p[0];
    acc[1] += w * p[1];
    acc[2] += w * p[2];
  };
  tap(x0, y0, w00);
  tap(x0 + 1, y0, w10);
  tap(x0, y0 + 1, w01);
  tap(x0 + 1, y0 + 1, w11);
  for (int c = 0; c < 3; ++c) {
    long v = std::lround(acc[c]);
    dst[c] = static_cast<uint8_t>(std::clamp(v, 0l, 255l));
  }
}

void rgb_to_hsv(double r, double g, double b, double& h, double& s,
                double& v) {
  v = std::max({r, g, b});
  double lo = std::min({r, g, b});
  double chroma = v - lo;
  s = v > 0.0 ? chroma / v : 0.0;
  if (chroma <= 0.0) {
    h = 0.0;
    return;
  }
  if (v == r) {
    h = (g - b) / chroma;
  } else if (v == g) {
    h = 2.0 + (b - r) / chroma;
  } else {
    h = 4.0 + (r - g) / chroma;
  }
  h /= 6.0;
  if (h < 0.0) h += 1.0;
}

void hsv_to_rgb(double h, double s, double v, double& r, double& g,
                double& b) {
  if (s <= 0.0) {
    r = g = b = v;
    return;
  }
  double h6 = (h - std::floor(h)) * 6.0;
  int i = static_cast<int>(h6) % 6;
  double f = h6 - std::floor(h6);
  double p = v * (1.0 - s);
  double q = v * (1.0 - s * f);
  double t = v * (1.0 - s * (1.0 - f));
  switch (i) {
    case 0: r = v; g = t; b = p; break;
    case 1: r = q; g = v; b = p; break;
    case 2: r = p; g = v; b = t; break;
    case 3: r = p; g = q; b = v; break;
    case 4: r = t; g = p; b = v; break;
    default: r = v; g = p; b = q; break;
  }
}

void flip_horizontal(RasterImage& img) {
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width / 2; ++x) {
      uint8_t* a = img.at(x, y);
      uint8_t* b = img.at(img.width - 1 - x, y);
      std::swap(a[0], b[0]);
      std::swap(a[1], b[1]);
      std::swap(a[2], b[2]);
    }
  }
}

void flip_vertical(RasterImage& img) {
  for (int y = 0; y < img.height / 2; ++y) {
    for (int x = 0; x < img.width; ++x) {
      uint8_t* a = img.at(x, y);
      uint8_t* b = img.at(x, img.height - 1 - y);
      std::swap(a[0], b[0]);
      std::swap(a[1], b[1]);
      std::swap(a[2], b[2]);
    }
  }
}

}  // namespace

FundusMask detect_mask(const RasterImage& img) {
  img.validate();
  const int w = img.width;
  const int h = img.height;
  const size_t n = static_cast<size_t>(w) * static_cast<size_t>(h);

  std::vector<uint8_t> lum(n);
  std::array<long, 256> hist{};
  for (size_t i = 0; i < n; ++i) {
    lum[i] = luma(img.pixels.data() + 3 * i);
    ++hist[lum[i]];
  }
  int threshold = otsu_threshold(hist, static_cast<long>(n));
  if (threshold < 0) {
    throw MaskNotFound("image luminance is uniform, no foreground");
  }

  // Largest 4-connected above-threshold component.
  std::vector<int32_t> label(n, -1);
  std::vector<size_t> stack;
  int32_t next_label = 0;
  int32_t best_label = -1;
  size_t best_area = 0;
  for (size_t start = 0; start < n; ++start) {
    if (label[start] >= 0 || lum[start] <= threshold) continue;
    size_t area = 0;
    stack.push_back(start);
    label[start] = next_label;
    while (!stack.empty()) {
      size_t i = stack.back();
      stack.pop_back();
      ++area;
      int x = static_cast<int>(i % static_cast<size_t>(w));
      int y = static_cast<int>(i / static_cast<size_t>(w));
      auto push = [&](int nx, int ny) {
        if (nx < 0 || ny < 0 || nx >= w || ny >= h) return;
        size_t j = static_cast<size_t>(ny) * static_cast<size_t>(w) +
                   static_cast<size_t>(nx);
        if (label[j] >= 0 || lum[j] <= threshold) return;
        label[j] = next_label;
        stack.push_back(j);
      };
      push(x - 1, y);
      push(x + 1, y);
      push(x, y - 1);
      push(x, y + 1);
    }
    if (area > best_area) {
      best_area = area;
      best_label = next_label;
    }
    ++next_label;
  }
  if (best_label < 0) {
    throw MaskNotFound("no pixel above the luminance threshold");
  }
  if (static_cast<double>(best_area) <
      kMinAreaFraction * static_cast<double>(n)) {
    throw MaskNotFound("largest foreground component covers under 10% of "
                       "the image");
  }

  // Rim: component pixels with an in-image background 4-neighbor.  Image
  // borders do not count, so a cropped fundus keeps only its visible arc.
  std::vector<std::pair<int, int>> rim;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      size_t i = static_cast<size_t>(y) * static_cast<size_t>(w) +
                 static_cast<size_t>(x);
      if (label[i] != best_label) continue;
      bool edge = (x > 0 && lum[i - 1] <= threshold) ||
                  (x + 1 < w && lum[i + 1] <= threshold) ||
                  (y > 0 && lum[i - static_cast<size_t>(w)] <= threshold) ||
                  (y + 1 < h && lum[i + static_cast<size_t>(w)] <= threshold);
      if (edge) rim.emplace_back(x, y);
    }
  }
  if (rim.size() < kMinRimPixels) {
    throw MaskNotFound("too few rim pixels to fit a circle");
  }

  CircleFit fit = fit_circle(rim);
  if (!fit.ok) {
    throw MaskNotFound("rim is degenerate, circle fit failed");
  }
  size_t near = 0;
  for (const auto& [x, y] : rim) {
    double dx = x - fit.cx;
    double dy = y - fit.cy;
    double dist = std::sqrt(dx * dx + dy * dy);
    if (std::fabs(dist - fit.r) <= kRimTolerance * fit.r) ++near;
  }
  double confidence =
      static_cast<double>(near) / static_cast<double>(rim.size());
  if (confidence < kMinConfidence) {
    throw MaskNotFound("rim fit confidence " + std::to_string(confidence) +
                       " below 0.8");
  }

  FundusMask mask;
  mask.cx = fit.cx;
  mask.cy = fit.cy;
  mask.diameter = 2.0 * (fit.r + kRimHalfPixel);
  mask.confidence = confidence;
  return mask;
}

namespace {

// Square canvas of kFundusDiameter, input point (cx, cy) at its center,
// scaled uniformly; off-image taps are black.
RasterImage resample_square(const RasterImage& img, double cx, double cy,
                            double scale) {
  const int side = kFundusDiameter;
  const double half = (side - 1) / 2.0;
  RasterImage out;
  out.width = side;
  out.height = side;
  out.pixels.assign(static_cast<size_t>(side) * static_cast<size_t>(side) * 3,
                    0);
  for (int oy = 0; oy < side; ++oy) {
    for (int ox = 0; ox < side; ++ox) {
      double ix = cx + (ox - half) / scale;
      double iy = cy + (oy - half) / scale;
      sample_bilinear(img, ix, iy, out.at(ox, oy));
    }
  }
  return out;
}

}  // namespace

RasterImage normalize_scale(const RasterImage& img, const FundusMask& mask) {
  img.validate();
  if (!(mask.diameter > 0.0)) {
    throw MaskNotFound("mask diameter must be positive");
  }
  const int side = kFundusDiameter;
  const double half = (side - 1) / 2.0;

  // Resample, measure, and fold any measured error back into the
  // input-frame estimate: the detector's sub-pixel residual would
  // otherwise be magnified by the scale factor.
  double cx = mask.cx;
  double cy = mask.cy;
  double d = mask.diameter;
  RasterImage best;
  double best_err = -1.0;
  for (int pass = 0; pass < kNormalizePasses; ++pass) {
    RasterImage out = resample_square(img, cx, cy, side / d);
    FundusMask re;
    try {
      re = detect_mask(out);
    } catch (const MaskNotFound&) {
      // The output is not re-detectable; refinement is impossible.
      return best_err >= 0.0 ? best : out;
    }
    double err = std::fabs(re.diameter - side);
    if (best_err < 0.0 || err < best_err) {
      best = std::move(out);
      best_err = err;
    }
    if (best_err <= kNormalizeTolerance) break;
    cx += (re.cx - half) * d / side;
    cy += (re.cy - half) * d / side;
    d *= re.diameter / side;
  }
  return best;
}

RasterImage augment(const RasterImage& img, const AugmentParams& params,
                    uint64_t seed) {
  img.validate();
  if (!std::isfinite(params.brightness_delta) ||
      std::fabs(params.brightness_delta) > kMaxBrightnessDelta) {
    throw ParamOutOfRange("brightness delta " +
                          std::to_string(params.brightness_delta) +
                          " outside +/-" + std::to_string(kMaxBrightnessDelta));
  }
  if (!std::isfinite(params.saturation_factor) ||
      params.saturation_factor < kMinSaturationFactor ||
      params.saturation_factor > kMaxSaturationFactor) {
    throw ParamOutOfRange("saturation factor " +
                          std::to_string(params.saturation_factor) +
                          " outside the allowed range");
  }
  if (!std::isfinite(params.hue_delta) ||
      std::fabs(params.hue_delta) > kMaxHueDelta) {
    throw ParamOutOfRange("hue delta " + std::to_string(params.hue_delta) +
                          " outside +/-" + std::to_string(kMaxHueDelta));
  }
  if (!std::isfinite(params.contrast_factor) ||
      params.contrast_factor < kMinContrastFactor ||
      params.contrast_factor > kMaxContrastFactor) {
    throw ParamOutOfRange("contrast factor " +
                          std::to_string(params.contrast_factor) +
                          " outside the allowed range");
  }

  RasterImage out = img;
  const size_t n =
      static_cast<size_t>(img.width) * static_cast<size_t>(img.height);
  const bool do_brightness = params.brightness_delta != 0.0;
  const bool do_hsv =
      params.saturation_factor != 1.0 || params.hue_delta != 0.0;
  const bool do_contrast = params.contrast_factor != 1.0;

  if (do_brightness || do_hsv || do_contrast) {
    std::vector<double> plane(n * 3);
    for (size_t i = 0; i < n * 3; ++i) plane[i] = out.pixels[i] / 255.0;
    auto clamp_plane = [&]() {
      for (double& c : plane) c = std::clamp(c, 0.0, 1.0);
    };

    if (do_brightness) {
      for (double& c : plane) c += params.brightness_delta;
      clamp_plane();
    }
    if (do_hsv) {
      for (size_t i = 0; i < n; ++i) {
        double h = 0.0;
        double s = 0.0;
        double v = 0.0;
        rgb_to_hsv(plane[3 * i], plane[3 * i + 1], plane[3 * i + 2], h, s, v);
        s = std::clamp(s * params.saturation_factor, 0.0, 1.0);
        h += params.hue_delta;
        hsv_to_rgb(h, s, v, plane[3 * i], plane[3 * i + 1], plane[3 * i + 2]);
      }
      clamp_plane();
    }
    if (do_contrast) {
      double mean[3] = {0.0, 0.0, 0.0};
      for (size_t i = 0; i < n; ++i) {
        mean[0] += plane[3 * i];
        mean[1] += plane[3 * i + 1];
        mean[2] += plane[3 * i + 2];
      }
      for (double& m : mean) m /= static_cast<double>(n);
      for (size_t i = 0; i < n; ++i) {
        for (size_t c = 0; c < 3; ++c) {
          plane[3 * i + c] =
              mean[c] + params.contrast_factor * (plane[3 * i + c] - mean[c]);
        }
      }
      clamp_plane();
    }
    for (size_t i = 0; i < n * 3; ++i) {
      out.pixels[i] =
          static_cast<uint8_t>(std::clamp(std::lround(plane[i] * 255.0), 0l,
                                          255l));
    }
  }

  SplitMix64 rng(seed);
  if (params.horizontal_flips && rng.next_double() < 0.5) {
    flip_horizontal(out);
  }
  if (params.vertical_flips && rng.next_double() < 0.5) {
    flip_vertical(out);
  }
  return out;
}

AugmentParams sample_augment_params(SplitMix64& rng) {
  AugmentParams p;
  p.brightness_delta =
      (2.0 * rng.next_double() - 1.0) * kMaxBrightnessDelta;
  p.saturation_factor =
      kMinSaturationFactor +
      rng.next_double() * (kMaxSaturationFactor - kMinSaturationFactor);
  p.hue_delta = (2.0 * rng.next_double() - 1.0) * kMaxHueDelta;
  p.contrast_factor =
      kMinContrastFactor +
      rng.next_double() * (kMaxContrastFactor - kMinContrastFactor);
  return p;
}

RasterImage synthetic_disc(const DiscSpec& spec) {
  if (spec.width <= 0 || spec.height <= 0) {
    throw ParamOutOfRange("disc canvas dimensions must be positive");
  }
  if (!(spec.diameter > 0.0)) {
    throw ParamOutOfRange("disc diameter must be positive");
  }
  RasterImage img = make_canvas(spec.width, spec.height, spec.bg);
  const double r = spec.diameter / 2.0;

  // 4x4 coverage supersampling gives the rim a smooth one-pixel ramp.
  for (int y = 0; y < spec.height; ++y) {
    if (y < spec.cy - r - 1.0 || y > spec.cy + r + 1.0) continue;
    for (int x = 0; x < spec.width; ++x) {
      double dx = x - spec.cx;
      double dy = y - spec.cy;
      double dist = std::sqrt(dx * dx + dy * dy);
      if (dist > r + 1.0) continue;
      double coverage = 1.0;
      if (dist > r - 1.0) {
        int inside = 0;
        for (int sy = 0; sy < 4; ++sy) {
          for (int sx = 0; sx < 4; ++sx) {
            double px = x - 0.5 + (sx + 0.5) / 4.0;
            double py = y - 0.5 + (sy + 0.5) / 4.0;
            double ddx = px - spec.cx;
            double ddy = py - spec.cy;
            if (ddx * ddx + ddy * ddy <= r * r) ++inside;
          }
        }
        coverage = inside / 16.0;
      }
      uint8_t* p = img.at(x, y);
      for (int c = 0; c < 3; ++c) {
        double v = spec.bg[static_cast<size_t>(c)] +
                   coverage * (spec.fg[static_cast<size_t>(c)] -
                               static_cast<double>(spec.bg[
                                   static_cast<size_t>(c)]));
        p[c] = static_cast<uint8_t>(std::clamp(std::lround(v), 0l, 255l));
      }
    }
  }
  return img;
}

}  // namespace gonstat
