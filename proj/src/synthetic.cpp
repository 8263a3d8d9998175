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


#include "atlasedit/synthetic.hpp"

#include <cmath>
#include <numbers>

namespace atlasedit {

SyntheticClip make_constant_clip(int width, int height, int frames, std::array<float, 3> color) {
  SyntheticClip out;
  for (int t = 0; t < frames; ++t) {
    Image f(width, height, 3);
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x)
        for (int c = 0; c < 3; ++c) f.at(x, y, c) = color[c];
    out.clip.frames.push_back(std::move(f));
    out.foreground.emplace_back(width, height, 1);
  }
  return out;
}

std::array<float, 3> square_clip_background(int x, int y, int width, int height) noexcept {
  constexpr double kTau = 2.0 * std::numbers::pi;
  const double u = static_cast<double>(x) / width, v = static_cast<double>(y) / height;
  std::array<float, 3> c{};
  for (int k = 0; k < 3; ++k) {
    const double val = 0.5 + 0.15 * std::sin(kTau * 1.5 * u + k) + 0.12 * std::cos(kTau * v + 2.0 * k) +
                       0.05 * std::sin(kTau * (2.0 * u + 3.0 * v) + 0.5 * k);
    c[k] = quantize8(static_cast<float>(val));
  }
  return c;
}

SyntheticClip make_translating_square_clip(const SquareClipSpec& spec) {
  require(spec.frames >= 1 && spec.width > 0 && spec.height > 0 && spec.square > 0, "bad square clip spec");
  SyntheticClip out;
  for (int t = 0; t < spec.frames; ++t) {
    Image f(spec.width, spec.height, 3);
    Mask m(spec.width, spec.height, 1);
    const Rect sq{spec.start_x + spec.speed * t, spec.start_y, spec.square, spec.square};
    for (int y = 0; y < spec.height; ++y)
      for (int x = 0; x < spec.width; ++x) {
        const bool inside = sq.contains(x, y);
        const auto c = inside ? spec.color : square_clip_background(x, y, spec.width, spec.height);
        for (int k = 0; k < 3; ++k) f.at(x, y, k) = quantize8(c[k]);
        m.at(x, y) = inside ? 1 : 0;
      }
    out.clip.frames.push_back(std::move(f));
    out.foreground.push_back(std::move(m));
  }
  return out;
}

Image make_blob_image(int width, int height, const std::vector<BlobSpec>& blobs) {
  Image img(width, height, 3, 1.0f);
  for (const BlobSpec& b : blobs)
    for (int y = b.rect.y; y < b.rect.bottom(); ++y)
      for (int x = b.rect.x; x < b.rect.right(); ++x)
        if (x >= 0 && y >= 0 && x < width && y < height)
          for (int k = 0; k < 3; ++k) img.at(x, y, k) = b.color[k];
  return img;
}

}  // namespace atlasedit
