// Copyright 2026 The atlasedit Authors
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


#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "atlasedit/error.hpp"

namespace atlasedit {

/// Interleaved H x W x C raster. Row-major, channels innermost.
template <typename T>
class Raster {
 public:
  using value_type = T;

  Raster() = default;
  Raster(int width, int height, int channels, T fill = T{})
      : width_(width), height_(height), channels_(channels) {
    require(width >= 0 && height >= 0 && channels >= 0, "raster dimensions must be non-negative");
    data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  std::size_t size() const noexcept { return data_.size(); }
  std::size_t pixel_count() const noexcept { return static_cast<std::size_t>(width_) * height_; }
  bool empty() const noexcept { return data_.empty(); }

  std::size_t index(int x, int y, int c = 0) const noexcept {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }
  T& at(int x, int y, int c = 0) noexcept { return data_[index(x, y, c)]; }
  const T& at(int x, int y, int c = 0) const noexcept { return data_[index(x, y, c)]; }

  std::span<T> pixel(int x, int y) noexcept { return {data_.data() + index(x, y), static_cast<std::size_t>(channels_)}; }
  std::span<const T> pixel(int x, int y) const noexcept {
    return {data_.data() + index(x, y), static_cast<std::size_t>(channels_)};
  }

  std::vector<T>& data() noexcept { return data_; }
  const std::vector<T>& data() const noexcept { return data_; }

  template <typename U>
  bool same_shape(const Raster<U>& o) const noexcept {
    return width_ == o.width() && height_ == o.height() && channels_ == o.channels();
  }
  template <typename U>
  bool same_extent(const Raster<U>& o) const noexcept {
    return width_ == o.width() && height_ == o.height();
  }

  bool operator==(const Raster& o) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<T> data_;
};

using Image = Raster<float>;
using Mask = Raster<std::uint8_t>;
/// Diffusion state tensor; double precision so schedule math is not limited by storage.
using State = Raster<double>;

struct Rect {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;

  int right() const noexcept { return x + width; }
  int bottom() const noexcept { return y + height; }
  bool empty() const noexcept { return width <= 0 || height <= 0; }
  bool contains(int px, int py) const noexcept { return px >= x && px < right() && py >= y && py < bottom(); }
  bool within(int w, int h) const noexcept { return x >= 0 && y >= 0 && right() <= w && bottom() <= h; }
  bool operator==(const Rect&) const = default;
};

// Geometry helpers. Images resample with half-pixel centers and clamped borders.
Image resize_bilinear(const Image& src, int width, int height);
/// Box-filter resampling; each output texel averages the source area it covers.
Image resize_area(const Image& src, int width, int height);
Image resize(const Image& src, int width, int height);
Mask resize_nearest(const Mask& src, int width, int height);
/// Any covered source texel sets the output texel.
Mask max_pool(const Mask& src, int width, int height);

Image crop(const Image& src, const Rect& r);
Mask crop(const Mask& src, const Rect& r);
void paste(Image& dst, const Image& src, int x, int y);

Mask dilate(const Mask& m, int radius);
std::size_t count_set(const Mask& m);
/// Tight bounding box of set texels; empty rect if none.
Rect bounding_box(const Mask& m);

State to_state(const Image& img);
Image to_image(const State& s, bool clamp01);

/// Take `inside` where m != 0, else `outside`. Extents must agree.
Image select(const Mask& m, const Image& inside, const Image& outside);

}  // namespace atlasedit
