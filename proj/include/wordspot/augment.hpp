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

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "wordspot/rng.hpp"
#include "wordspot/tensor.hpp"

namespace wordspot::augment {

// Grayscale word image, values in [0,1]; 0 is background, 1 is ink.
class WordImage {
 public:
  WordImage() = default;
  WordImage(std::size_t height, std::size_t width, double fill = 0.0);
  WordImage(std::size_t height, std::size_t width, std::vector<double> pixels);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::span<const double> pixels() const noexcept { return pixels_; }
  std::span<double> pixels() noexcept { return pixels_; }

  double at(std::size_t y, std::size_t x) const { return pixels_[y * width_ + x]; }
  double& at(std::size_t y, std::size_t x) { return pixels_[y * width_ + x]; }

  // Throws DataError unless H, W >= 1 and every pixel lies in [0,1].
  void validate() const;

  friend bool operator==(const WordImage&, const WordImage&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<double> pixels_;
};

// Raw 8-bit grayscale raster as read from disk.
struct RawImage {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> pixels;
};

enum class InkPolarity {
  kDarkInkOnLight,  // scanned paper: raw 255 is background
  kLightInkOnDark,  // raw 0 is background
};

// Scales to [0,1] and inverts dark-on-light sources so that ink maps to 1.
WordImage normalize_pixels(const RawImage& raw,
                           InkPolarity polarity = InkPolarity::kDarkInkOnLight);
// Already-normalized input: validated and returned unchanged.
WordImage normalize_pixels(const WordImage& normalized);

// Background-filled copy enlarged to at least min_height x min_width, with the
// original placed in the top-left corner.
WordImage pad_to(const WordImage& image, std::size_t min_height, std::size_t min_width);

nn::Tensor to_tensor(const WordImage& image);

struct Point {
  double x = 0.0;
  double y = 0.0;
};

// x' = m[0] x + m[1] y + m[2],  y' = m[3] x + m[4] y + m[5]
struct AffineTransform {
  std::array<double, 6> m{1.0, 0.0, 0.0, 0.0, 1.0, 0.0};

  static AffineTransform identity() { return {}; }
  static AffineTransform translation(double dx, double dy) { return {{1.0, 0.0, dx, 0.0, 1.0, dy}}; }

  Point apply(Point p) const;
  double determinant() const { return m[0] * m[4] - m[1] * m[3]; }
  AffineTransform inverse() const;  // throws NumericError when singular
};

// Fixed source triangle in the middle of a W x H image:
// (0.35 W, 0.5 H), (0.65 W, 0.35 H), (0.65 W, 0.65 H).
std::array<Point, 3> augmentation_source_points(std::size_t width, std::size_t height);

// The unique affine map sending src[i] to dst[i]; throws NumericError when
// either triple is collinear.
AffineTransform affine_from_points(const std::array<Point, 3>& src, const std::array<Point, 3>& dst);

struct AugmentRange {
  double lo = 0.8;
  double hi = 1.1;
};

// Each destination coordinate is the source coordinate times an independent
// U[lo, hi] factor. Collinear draws are resampled a bounded number of times.
AffineTransform sample_augmentation_transform(std::size_t width, std::size_t height, Rng& rng,
                                              AugmentRange range = {});

// Inverse-mapped bilinear resampling; samples outside the source read as 0.
// Output has the input's size.
WordImage warp_image(const WordImage& image, const AffineTransform& transform);

WordImage augment_image(const WordImage& image, Rng& rng, AugmentRange range = {});

}  // namespace wordspot::augment
