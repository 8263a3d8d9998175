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

#include <filesystem>
#include <vector>

#include "atlasedit/raster.hpp"

namespace atlasedit {

struct VideoClip {
  std::vector<Image> frames;
  double fps = 30.0;

  int frame_count() const noexcept { return static_cast<int>(frames.size()); }
  int width() const noexcept { return frames.empty() ? 0 : frames.front().width(); }
  int height() const noexcept { return frames.empty() ? 0 : frames.front().height(); }

  /// Throws InvalidArgument unless: F >= 2, shared RGB dims, values in [0,1].
  void validate() const;
};

struct PixelLocation {
  int x = 0;
  int y = 0;
  int t = 0;
};

// PNG I/O. 8/16-bit gray, RGB and RGBA are read; writes are 8-bit.
Image read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const Image& img);
void write_png(const std::filesystem::path& path, const Mask& mask);  // 0/255
std::vector<unsigned char> encode_png(const Image& img);
Mask read_mask_png(const std::filesystem::path& path);

/// Numbered PNG frames in lexicographic filename order.
VideoClip read_frames(const std::filesystem::path& dir);
std::vector<Mask> read_mask_frames(const std::filesystem::path& dir);
void write_frames(const std::filesystem::path& dir, const VideoClip& clip);
std::string frame_filename(int index);

/// 8-bit quantization applied by PNG writes, exposed so callers can predict round trips.
float quantize8(float v) noexcept;

}  // namespace atlasedit
