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
#include <cstdint>
#include <string>
#include <vector>

#include "atlasedit/raster.hpp"
#include "atlasedit/video.hpp"

namespace atlasedit {

enum class Layer { kForeground, kBackground };

std::string to_string(Layer layer);
Layer parse_layer(const std::string& name);

/// Normalized atlas coordinate; [-1,1] maps onto texel centers 0..S-1.
struct UVCoord {
  double u = 0.0;
  double v = 0.0;
};

using Rgb = std::array<double, 3>;
using Rgba = std::array<double, 4>;

struct LossWeights {
  double reconstruction = 1.0;
  double alpha_regularization = 0.02;
  double rigidity = 0.01;
};

/// Knobs of the self-supervised layered-atlas fit. The first block is the
/// classic coordinate-network configuration; the rest tunes the fit itself.
struct CoordinateNetworkConfig {
  int hidden_width = 64;
  int depth = 4;
  int positional_encoding_bands = 8;
  double learning_rate = 2e-3;
  int iterations = 3000;
  LossWeights loss_weights;

  // UV mapping networks (foreground and background).
  int mapping_hidden_width = 32;
  int mapping_depth = 3;
  int mapping_encoding_bands = 4;

  int atlas_size = 256;        // stored raster side S
  int grid_resolution = 0;     // trainable texel grid side; 0 = max(W, H)
  double grid_learning_rate = 2e-2;
  int batch_size = 2048;
  double target_psnr = 30.0;
  double alpha_margin = 0.1;   // opacity saturates to exactly 0/1 beyond this margin
  double bootstrap_fraction = 0.3;
  double bootstrap_weight = 1.0;
  double bootstrap_threshold = 0.08;
  double uv_bound_weight = 1.0;

  void validate() const;
};

struct TrainingReport {
  double psnr = 0.0;  // +inf when reconstruction is exact
  bool converged = false;
  bool trivial = false;  // constant input, fitted analytically
  int iterations = 0;
  double final_loss = 0.0;
};

/// Layered atlas decomposition of one clip. Immutable once built.
struct AtlasSet {
  int atlas_size = 0;
  int width = 0;
  int height = 0;
  int frames = 0;
  Image fg_rgba;  // S x S x 4
  Image bg_rgba;  // S x S x 4, alpha == 1
  std::vector<float> uv_fg;  // F x H x W x 2
  std::vector<float> uv_bg;  // F x H x W x 2
  std::vector<float> alpha;  // F x H x W
  std::vector<float> network_weights;
  CoordinateNetworkConfig config;
  std::uint64_t seed = 0;
  TrainingReport report;

  std::size_t pixel_index(int x, int y, int t) const noexcept {
    return (static_cast<std::size_t>(t) * height + y) * width + x;
  }
  UVCoord uv(Layer layer, int x, int y, int t) const noexcept;
  const Image& layer(Layer l) const noexcept { return l == Layer::kForeground ? fg_rgba : bg_rgba; }
  Image& layer(Layer l) noexcept { return l == Layer::kForeground ? fg_rgba : bg_rgba; }

  void validate() const;
};

struct AtlasLookup {
  UVCoord fg;
  UVCoord bg;
  double alpha = 0.0;
};

/// Stored UVs and opacity for p. Throws InvalidArgument when p is out of bounds.
AtlasLookup map_to_atlas(const AtlasSet& atlas, const PixelLocation& p);

struct BilinearTaps {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  double fx = 0.0, fy = 0.0;  // weight of x1 / y1
};

/// Texel neighbourhood of uv on a width x height raster. Offsets within 1e-9 of
/// a texel center snap to it so texel-center lookups are exact.
BilinearTaps bilinear_taps(int width, int height, UVCoord uv) noexcept;
double texel_coordinate(double u, int extent) noexcept;
double uv_coordinate(double texel, int extent) noexcept;

/// Bilinear lookup; uv is clamped into [-1,1]^2. Missing channels read as 0.
Rgba sample_atlas(const Image& raster, UVCoord uv);

/// (1 - alpha) * c_b + alpha * c_f per channel. alpha must lie in [0,1].
Rgb reconstruct_pixel(const Rgb& c_f, const Rgb& c_b, double alpha);

VideoClip reconstruct_video(const AtlasSet& atlas);

/// Atlas-space texels an edit changed, for one layer.
struct TouchedRegion {
  Layer layer = Layer::kForeground;
  Mask mask;  // S x S
};

/// Re-blends pixels whose lookup into the touched layer reaches a touched
/// texel with non-zero weight while that layer is visible (alpha > 0 for the
/// foreground, alpha < 1 for the background). All other pixels are copied
/// bit-exact from `original`.
VideoClip composite_edit_layer(const VideoClip& original, const AtlasSet& edited_atlas, const TouchedRegion& touched);

/// Per-frame mask of the pixels composite_edit_layer would re-blend.
std::vector<Mask> reached_pixels(const AtlasSet& atlas, const TouchedRegion& touched);

}  // namespace atlasedit
