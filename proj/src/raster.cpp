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


#include "atlasedit/raster.hpp"

#include <algorithm>
#include <cmath>

namespace atlasedit {

namespace {

struct Tap {
  int index;
  double weight;
};

// Per-output-index source taps for box filtering along one axis.
std::vector<std::vector<Tap>> area_taps(int src, int dst) {
  std::vector<std::vector<Tap>> taps(dst);
  const double scale = static_cast<double>(src) / dst;
  for (int i = 0; i < dst; ++i) {
    const double a = i * scale;
    const double b = (i + 1) * scale;
    const int j0 = static_cast<int>(std::floor(a));
    const int j1 = std::min(src - 1, static_cast<int>(std::ceil(b)) - 1);
    for (int j = j0; j <= j1; ++j) {
      const double w = std::min<double>(b, j + 1) - std::max<double>(a, j);
      if (w > 0) taps[i].push_back({j, w / scale});
    }
  }
  return taps;
}

std::vector<Tap> linear_taps(int src, int dst, int i) {
  double pos = (i + 0.5) * static_cast<double>(src) / dst - 0.5;
  pos = std::clamp(pos, 0.0, static_cast<double>(src - 1));
  const int j0 = static_cast<int>(std::floor(pos));
  const int j1 = std::min(j0 + 1, src - 1);
  const double f = pos - j0;
  if (j1 == j0 || f == 0.0) return {{j0, 1.0}};
  return {{j0, 1.0 - f}, {j1, f}};
}

template <typename TapFn>
Image separable(const Image& src, int width, int height, TapFn taps_x, TapFn taps_y) {
  Image out(width, height, src.channels());
  const int c = src.channels();
  std::vector<double> acc(c);
  for (int y = 0; y < height; ++y) {
    const auto& ty = taps_y[y];
    for (int x = 0; x < width; ++x) {
      const auto& tx = taps_x[x];
      std::fill(acc.begin(), acc.end(), 0.0);
      for (const Tap& a : ty)
        for (const Tap& b : tx) {
          const double w = a.weight * b.weight;
          auto px = src.pixel(b.index, a.index);
          for (int k = 0; k < c; ++k) acc[k] += w * px[k];
        }
      for (int k = 0; k < c; ++k) out.at(x, y, k) = static_cast<float>(acc[k]);
    }
  }
  return out;
}

}  // namespace

Image resize_bilinear(const Image& src, int width, int height) {
  require(width > 0 && height > 0 && !src.empty(), "resize: empty raster");
  if (width == src.width() && height == src.height()) return src;
  std::vector<std::vector<Tap>> tx(width), ty(height);
  for (int i = 0; i < width; ++i) tx[i] = linear_taps(src.width(), width, i);
  for (int i = 0; i < height; ++i) ty[i] = linear_taps(src.height(), height, i);
  return separable(src, width, height, tx, ty);
}

Image resize_area(const Image& src, int width, int height) {
  require(width > 0 && height > 0 && !src.empty(), "resize: empty raster");
  if (width == src.width() && height == src.height()) return src;
  return separable(src, width, height, area_taps(src.width(), width), area_taps(src.height(), height));
}

Image resize(const Image& src, int width, int height) {
  if (width <= src.width() && height <= src.height()) return resize_area(src, width, height);
  return resize_bilinear(src, width, height);
}

Mask resize_nearest(const Mask& src, int width, int height) {
  require(width > 0 && height > 0 && !src.empty(), "resize: empty mask");
  Mask out(width, height, src.channels());
  for (int y = 0; y < height; ++y) {
    const int sy = std::min(src.height() - 1, static_cast<int>((y + 0.5) * src.height() / height));
    for (int x = 0; x < width; ++x) {
      const int sx = std::min(src.width() - 1, static_cast<int>((x + 0.5) * src.width() / width));
      for (int c = 0; c < src.channels(); ++c) out.at(x, y, c) = src.at(sx, sy, c);
    }
  }
  return out;
}

Mask max_pool(const Mask& src, int width, int height) {
  require(width > 0 && height > 0 && !src.empty(), "max_pool: empty mask");
  if (width == src.width() && height == src.height()) return src;
  const auto tx = area_taps(src.width(), width);
  const auto ty = area_taps(src.height(), height);
  Mask out(width, height, 1);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      std::uint8_t any = 0;
      for (const Tap& a : ty[y])
        for (const Tap& b : tx[x])
          if (src.at(b.index, a.index)) any = 1;
      out.at(x, y) = any;
    }
  return out;
}

Image crop(const Image& src, const Rect& r) {
  require(r.within(src.width(), src.height()) && !r.empty(), "crop rectangle outside raster");
  Image out(r.width, r.height, src.channels());
  for (int y = 0; y < r.height; ++y)
    std::copy_n(src.data().begin() + src.index(r.x, r.y + y), static_cast<std::size_t>(r.width) * src.channels(),
                out.data().begin() + out.index(0, y));
  return out;
}

Mask crop(const Mask& src, const Rect& r) {
  require(r.within(src.width(), src.height()) && !r.empty(), "crop rectangle outside mask");
  Mask out(r.width, r.height, src.channels());
  for (int y = 0; y < r.height; ++y)
    for (int x = 0; x < r.width; ++x)
      for (int c = 0; c < src.channels(); ++c) out.at(x, y, c) = src.at(r.x + x, r.y + y, c);
  return out;
}

void paste(Image& dst, const Image& src, int x, int y) {
  require(src.channels() == dst.channels(), "paste: channel mismatch");
  require(Rect{x, y, src.width(), src.height()}.within(dst.width(), dst.height()), "paste: outside raster");
  for (int r = 0; r < src.height(); ++r)
    std::copy_n(src.data().begin() + src.index(0, r), static_cast<std::size_t>(src.width()) * src.channels(),
                dst.data().begin() + dst.index(x, y + r));
}

Mask dilate(const Mask& m, int radius) {
  if (radius <= 0) return m;
  Mask out(m.width(), m.height(), 1);
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x) {
      if (!m.at(x, y)) continue;
      for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx) {
          const int nx = x + dx, ny = y + dy;
          if (dx * dx + dy * dy > radius * radius) continue;
          if (nx >= 0 && ny >= 0 && nx < m.width() && ny < m.height()) out.at(nx, ny) = 1;
        }
    }
  return out;
}

std::size_t count_set(const Mask& m) {
  return static_cast<std::size_t>(std::count_if(m.data().begin(), m.data().end(), [](auto v) { return v != 0; }));
}

Rect bounding_box(const Mask& m) {
  int x0 = m.width(), y0 = m.height(), x1 = -1, y1 = -1;
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x)
      if (m.at(x, y)) {
        x0 = std::min(x0, x);
        y0 = std::min(y0, y);
        x1 = std::max(x1, x);
        y1 = std::max(y1, y);
      }
  if (x1 < 0) return {};
  return {x0, y0, x1 - x0 + 1, y1 - y0 + 1};
}

State to_state(const Image& img) {
  State s(img.width(), img.height(), img.channels());
  std::copy(img.data().begin(), img.data().end(), s.data().begin());
  return s;
}

Image to_image(const State& s, bool clamp01) {
  Image img(s.width(), s.height(), s.channels());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double v = clamp01 ? std::clamp(s.data()[i], 0.0, 1.0) : s.data()[i];
    img.data()[i] = static_cast<float>(v);
  }
  return img;
}

Image select(const Mask& m, const Image& inside, const Image& outside) {
  require(inside.same_shape(outside) && m.same_extent(inside), "select: shape mismatch");
  Image out = outside;
  for (int y = 0; y < out.height(); ++y)
    for (int x = 0; x < out.width(); ++x)
      if (m.at(x, y))
        for (int c = 0; c < out.channels(); ++c) out.at(x, y, c) = inside.at(x, y, c);
  return out;
}

}  // namespace atlasedit
