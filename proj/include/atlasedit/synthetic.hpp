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

#include <array>
#include <vector>

#include "atlasedit/video.hpp"

namespace atlasedit {

/// Generated clip with its ground-truth foreground masks.
struct SyntheticClip {
  VideoClip clip;
  std::vector<Mask> foreground;
};

SyntheticClip make_constant_clip(int width, int height, int frames, std::array<float, 3> color);

struct SquareClipSpec {
  int width = 64;
  int height = 64;
  int frames = 16;
  int square = 12;
  int speed = 2;  // px per frame, horizontal
  int start_x = 4;
  int start_y = 26;
  std::array<float, 3> color{0.95f, 0.15f, 0.1f};
};

/// Solid square translating over a smooth, fixed sinusoidal texture.
SyntheticClip make_translating_square_clip(const SquareClipSpec& spec = {});

/// Background texture used by make_translating_square_clip.
std::array<float, 3> square_clip_background(int x, int y, int width, int height) noexcept;

/// Opaque axis-aligned blobs on a white canvas.
struct BlobSpec {
  Rect rect;
  std::array<float, 3> color;
};
Image make_blob_image(int width, int height, const std::vector<BlobSpec>& blobs);

}  // namespace atlasedit
