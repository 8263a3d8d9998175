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

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <string>

#include <unistd.h>

#include "atlasedit/atlas.hpp"
#include "atlasedit/nla.hpp"
#include "atlasedit/video.hpp"

namespace fixtures {

using namespace atlasedit;

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("atlasedit_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& p) const { return path_ / p; }

 private:
  std::filesystem::path path_;
};

struct SquareAtlasSpec {
  int size = 33;  // frame side == atlas side; (size - 1) a power of two keeps float UVs exact
  int frames = 4;
  int square = 8;
  int speed = 3;
  int start_x = 4;
  int start_y = 12;
  std::array<float, 3> color{quantize8(0.9f), quantize8(0.1f), quantize8(0.1f)};
};

inline std::array<float, 3> background(int x, int y, int n) {
  const double u = static_cast<double>(x) / n, v = static_cast<double>(y) / n;
  return {quantize8(static_cast<float>(0.55 + 0.25 * std::sin(6.0 * u + 1.0))),
          quantize8(static_cast<float>(0.6 + 0.2 * std::cos(5.0 * v))),
          quantize8(static_cast<float>(0.5 + 0.2 * std::sin(3.0 * (u + v))))};
}

inline bool in_square(const SquareAtlasSpec& s, int x, int y, int t) {
  const int x0 = s.start_x + s.speed * t;
  return x >= x0 && x < x0 + s.square && y >= s.start_y && y < s.start_y + s.square;
}

/// Hand-built two-layer atlas of a square moving right over a texture. The
/// foreground mapping undoes the motion, so the square owns one atlas region.
inline AtlasSet square_atlas(const SquareAtlasSpec& s = {}) {
  AtlasSet a;
  a.atlas_size = s.size;
  a.width = a.height = s.size;
  a.frames = s.frames;
  a.fg_rgba = Image(s.size, s.size, 4);
  a.bg_rgba = Image(s.size, s.size, 4);
  for (int y = 0; y < s.size; ++y)
    for (int x = 0; x < s.size; ++x) {
      const auto bg = background(x, y, s.size);
      for (int c = 0; c < 3; ++c) a.bg_rgba.at(x, y, c) = bg[c];
      a.bg_rgba.at(x, y, 3) = 1.0f;
      const bool sq = in_square(s, x, y, 0);
      for (int c = 0; c < 3; ++c) a.fg_rgba.at(x, y, c) = sq ? s.color[c] : 0.5f;
      a.fg_rgba.at(x, y, 3) = sq ? 1.0f : 0.0f;
    }
  const std::size_t n = static_cast<std::size_t>(s.size) * s.size * s.frames;
  a.uv_fg.resize(2 * n);
  a.uv_bg.resize(2 * n);
  a.alpha.resize(n);
  for (int t = 0; t < s.frames; ++t)
    for (int y = 0; y < s.size; ++y)
      for (int x = 0; x < s.size; ++x) {
        const std::size_t i = a.pixel_index(x, y, t);
        const UVCoord bg = identity_uv(x, y, s.size, s.size);
        const UVCoord fg = identity_uv(std::max(0, x - s.speed * t), y, s.size, s.size);
        a.uv_bg[2 * i] = static_cast<float>(bg.u);
        a.uv_bg[2 * i + 1] = static_cast<float>(bg.v);
        a.uv_fg[2 * i] = static_cast<float>(fg.u);
        a.uv_fg[2 * i + 1] = static_cast<float>(fg.v);
        a.alpha[i] = in_square(s, x, y, t) ? 1.0f : 0.0f;
      }
  a.report.psnr = 60.0;
  a.report.converged = true;
  a.seed = 1;
  a.network_weights = {0.25f, -0.5f, 1.0f};
  a.validate();
  return a;
}

/// Smooth RGB test pattern and a perturbed copy, both in [0,1].
inline Image sine_image(int width, int height) {
  Image img(width, height, 3);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = static_cast<float>(0.5 + 0.4 * std::sin(0.3 * x + 0.2 * y + c));
  return img;
}

inline Image perturbed_sine_image(int width, int height) {
  Image img(width, height, 3);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      for (int c = 0; c < 3; ++c) {
        const double a = 0.5 + 0.4 * std::sin(0.3 * x + 0.2 * y + c);
        img.at(x, y, c) = static_cast<float>(std::clamp(a + 0.08 * std::cos(0.7 * x - 0.4 * y + 2 * c), 0.0, 1.0));
      }
  return img;
}

inline Image solid(int width, int height, std::array<float, 3> rgb) {
  Image img(width, height, 3);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = rgb[c];
  return img;
}

}  // namespace fixtures
