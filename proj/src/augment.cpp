/* Copyright (c) 2026 The wordspot Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License. */

#include "wordspot/augment.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wordspot/error.hpp"

namespace wordspot::augment {

WordImage::WordImage(std::size_t height, std::size_t width, double fill)
    : height_(height), width_(width), pixels_(height * width, fill) {}

WordImage::WordImage(std::size_t height, std::size_t width, std::vector<double> pixels)
    : height_(height), width_(width), pixels_(std::move(pixels)) {
  if (pixels_.size() != height_ * width_) throw ShapeError("word image pixel count mismatch");
}

void WordImage::validate() const {
  if (height_ < 1 || width_ < 1) throw DataError("word image must be at least 1x1");
  for (double v : pixels_) {
    if (!(v >= 0.0 && v <= 1.0)) throw DataError("word image pixel outside [0,1]");
  }
}

WordImage normalize_pixels(const RawImage& raw, InkPolarity polarity) {
  if (raw.height == 0 || raw.width == 0 || raw.pixels.empty()) throw DataError("empty image");
  if (raw.pixels.size() != raw.height * raw.width) throw DataError("raw image size mismatch");
  std::vector<double> px(raw.pixels.size());
  for (std::size_t i = 0; i < px.size(); ++i) {
    const double v = raw.pixels[i] / 255.0;
    px[i] = polarity == InkPolarity::kDarkInkOnLight ? 1.0 - v : v;
  }
  return WordImage(raw.height, raw.width, std::move(px));
}

WordImage normalize_pixels(const WordImage& normalized) {
  normalized.validate();
  return normalized;
}

WordImage pad_to(const WordImage& image, std::size_t min_height, std::size_t min_width) {
  if (image.height() >= min_height && image.width() >= min_width) return image;
  WordImage out(std::max(image.height(), min_height), std::max(image.width(), min_width), 0.0);
  for (std::size_t y = 0; y < image.height(); ++y) {
    for (std::size_t x = 0; x < image.width(); ++x) out.at(y, x) = image.at(y, x);
  }
  return out;
}

nn::Tensor to_tensor(const WordImage& image) {
  return nn::Tensor({1, 1, image.height(), image.width()},
                    std::vector<double>(image.pixels().begin(), image.pixels().end()));
}

Point AffineTransform::apply(Point p) const {
  return {m[0] * p.x + m[1] * p.y + m[2], m[3] * p.x + m[4] * p.y + m[5]};
}

AffineTransform AffineTransform::inverse() const {
  const double det = determinant();
  if (!(std::abs(det) > 1e-12)) throw NumericError("singular affine transform");
  AffineTransform inv;
  inv.m[0] = m[4] / det;
  inv.m[1] = -m[1] / det;
  inv.m[3] = -m[3] / det;
  inv.m[4] = m[0] / det;
  inv.m[2] = -(inv.m[0] * m[2] + inv.m[1] * m[5]);
  inv.m[5] = -(inv.m[3] * m[2] + inv.m[4] * m[5]);
  return inv;
}

std::array<Point, 3> augmentation_source_points(std::size_t width, std::size_t height) {
  const double w = static_cast<double>(width);
  const double h = static_cast<double>(height);
  return {Point{0.35 * w, 0.5 * h}, Point{0.65 * w, 0.35 * h}, Point{0.65 * w, 0.65 * h}};
}

namespace {

double twice_area(const std::array<Point, 3>& p) {
  return (p[1].x - p[0].x) * (p[2].y - p[0].y) - (p[2].x - p[0].x) * (p[1].y - p[0].y);
}

}  // namespace

AffineTransform affine_from_points(const std::array<Point, 3>& src, const std::array<Point, 3>& dst) {
  const double det = twice_area(src);
  const double scale = std::max({std::abs(src[1].x - src[0].x), std::abs(src[2].x - src[0].x),
                                 std::abs(src[1].y - src[0].y), std::abs(src[2].y - src[0].y), 1.0});
  if (std::abs(det) <= 1e-9 * scale * scale) throw NumericError("collinear source points");
  const double dst_scale =
      std::max({std::abs(dst[1].x - dst[0].x), std::abs(dst[2].x - dst[0].x),
                std::abs(dst[1].y - dst[0].y), std::abs(dst[2].y - dst[0].y), 1.0});
  if (std::abs(twice_area(dst)) <= 1e-9 * dst_scale * dst_scale) {
    throw NumericError("collinear destination points");
  }
  // Cramer's rule on [x y 1] * (a b c)^T = target, once per output coordinate.
  auto solve = [&](double t0, double t1, double t2) {
    const double a = (t0 * (src[1].y - src[2].y) + t1 * (src[2].y - src[0].y) +
                      t2 * (src[0].y - src[1].y));
    const double b = (t0 * (src[2].x - src[1].x) + t1 * (src[0].x - src[2].x) +
                      t2 * (src[1].x - src[0].x));
    const double c = (t0 * (src[1].x * src[2].y - src[2].x * src[1].y) +
                      t1 * (src[2].x * src[0].y - src[0].x * src[2].y) +
                      t2 * (src[0].x * src[1].y - src[1].x * src[0].y));
    return std::array<double, 3>{a / det, b / det, c / det};
  };
  const auto rx = solve(dst[0].x, dst[1].x, dst[2].x);
  const auto ry = solve(dst[0].y, dst[1].y, dst[2].y);
  return {{rx[0], rx[1], rx[2], ry[0], ry[1], ry[2]}};
}

AffineTransform sample_augmentation_transform(std::size_t width, std::size_t height, Rng& rng,
                                              AugmentRange range) {
  if (width < 4 || height < 4) throw ArgumentError("augmentation needs an image of at least 4x4");
  const auto src = augmentation_source_points(width, height);
  std::uniform_real_distribution<double> factor(range.lo, range.hi);
  constexpr int kMaxTries = 16;
  for (int attempt = 0; attempt < kMaxTries; ++attempt) {
    std::array<Point, 3> dst;
    for (std::size_t i = 0; i < 3; ++i) {
      dst[i].x = src[i].x * factor(rng);
      dst[i].y = src[i].y * factor(rng);
    }
    try {
      return affine_from_points(src, dst);
    } catch (const NumericError&) {
      continue;
    }
  }
  throw NumericError("could not sample a non-degenerate augmentation transform");
}

WordImage warp_image(const WordImage& image, const AffineTransform& transform) {
  const AffineTransform inv = transform.inverse();
  const std::size_t h = image.height();
  const std::size_t w = image.width();
  WordImage out(h, w, 0.0);
  auto read = [&](long y, long x) -> double {
    if (y < 0 || x < 0 || y >= static_cast<long>(h) || x >= static_cast<long>(w)) return 0.0;
    return image.at(static_cast<std::size_t>(y), static_cast<std::size_t>(x));
  };
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const Point s = inv.apply({static_cast<double>(x), static_cast<double>(y)});
      const double fx0 = std::floor(s.x);
      const double fy0 = std::floor(s.y);
      if (fx0 < -1.0 || fy0 < -1.0 || fx0 > static_cast<double>(w) || fy0 > static_cast<double>(h)) {
        continue;
      }
      const long x0 = static_cast<long>(fx0);
      const long y0 = static_cast<long>(fy0);
      const double ax = s.x - fx0;
      const double ay = s.y - fy0;
      double v = (1.0 - ay) * ((1.0 - ax) * read(y0, x0) + (ax != 0.0 ? ax * read(y0, x0 + 1) : 0.0));
      if (ay != 0.0) {
        v += ay * ((1.0 - ax) * read(y0 + 1, x0) + (ax != 0.0 ? ax * read(y0 + 1, x0 + 1) : 0.0));
      }
      out.at(y, x) = std::clamp(v, 0.0, 1.0);
    }
  }
  return out;
}

WordImage augment_image(const WordImage& image, Rng& rng, AugmentRange range) {
  return warp_image(image, sample_augmentation_transform(image.width(), image.height(), rng, range));
}

}  // namespace wordspot::augment
