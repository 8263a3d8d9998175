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


#include "atlasedit/atlas.hpp"

#include <algorithm>
#include <cmath>

namespace atlasedit {

std::string to_string(Layer layer) { return layer == Layer::kForeground ? "fg" : "bg"; }

Layer parse_layer(const std::string& name) {
  if (name == "fg" || name == "foreground") return Layer::kForeground;
  if (name == "bg" || name == "background") return Layer::kBackground;
  throw InvalidArgument("unknown atlas layer '" + name + "'");
}

void CoordinateNetworkConfig::validate() const {
  require(hidden_width > 0 && depth > 0 && positional_encoding_bands > 0 && iterations > 0,
          "network counts must be positive");
  require(mapping_hidden_width > 0 && mapping_depth > 0 && mapping_encoding_bands > 0,
          "mapping network counts must be positive");
  require(atlas_size > 1 && grid_resolution >= 0 && batch_size > 0, "atlas sizes must be positive");
  require(learning_rate > 0 && grid_learning_rate > 0, "learning rates must be positive");
  require(loss_weights.reconstruction >= 0 && loss_weights.alpha_regularization >= 0 && loss_weights.rigidity >= 0,
          "loss weights must be non-negative");
  require(alpha_margin >= 0 && alpha_margin < 0.5, "alpha_margin must lie in [0, 0.5)");
  require(bootstrap_fraction >= 0 && bootstrap_fraction <= 1, "bootstrap_fraction must lie in [0,1]");
}

UVCoord AtlasSet::uv(Layer l, int x, int y, int t) const noexcept {
  const auto& table = l == Layer::kForeground ? uv_fg : uv_bg;
  const std::size_t i = 2 * pixel_index(x, y, t);
  return {table[i], table[i + 1]};
}

void AtlasSet::validate() const {
  require(width > 0 && height > 0 && frames >= 2 && atlas_size > 1, "atlas: bad dimensions");
  const std::size_t n = static_cast<std::size_t>(width) * height * frames;
  require(uv_fg.size() == 2 * n && uv_bg.size() == 2 * n && alpha.size() == n, "atlas: lookup tables do not cover the video");
  require(fg_rgba.width() == atlas_size && fg_rgba.height() == atlas_size && fg_rgba.channels() == 4,
          "atlas: foreground raster must be S x S x 4");
  require(bg_rgba.same_shape(fg_rgba), "atlas: background raster must be S x S x 4");
  for (float a : alpha) require(a >= 0.0f && a <= 1.0f, "atlas: opacity outside [0,1]");
}

AtlasLookup map_to_atlas(const AtlasSet& atlas, const PixelLocation& p) {
  if (p.x < 0 || p.y < 0 || p.t < 0 || p.x >= atlas.width || p.y >= atlas.height || p.t >= atlas.frames)
    throw InvalidArgument("pixel location outside the source video");
  return {atlas.uv(Layer::kForeground, p.x, p.y, p.t), atlas.uv(Layer::kBackground, p.x, p.y, p.t),
          atlas.alpha[atlas.pixel_index(p.x, p.y, p.t)]};
}

double texel_coordinate(double u, int extent) noexcept {
  return (std::clamp(u, -1.0, 1.0) + 1.0) * 0.5 * (extent - 1);
}

double uv_coordinate(double texel, int extent) noexcept { return texel / (extent - 1) * 2.0 - 1.0; }

BilinearTaps bilinear_taps(int width, int height, UVCoord uv) noexcept {
  auto axis = [](double pos, int extent, int& i0, int& i1, double& f) {
    const double r = std::round(pos);
    if (std::abs(pos - r) < 1e-9) pos = r;
    i0 = std::clamp(static_cast<int>(std::floor(pos)), 0, extent - 1);
    i1 = std::min(i0 + 1, extent - 1);
    f = i1 == i0 ? 0.0 : pos - i0;
  };
  BilinearTaps t;
  axis(texel_coordinate(uv.u, width), width, t.x0, t.x1, t.fx);
  axis(texel_coordinate(uv.v, height), height, t.y0, t.y1, t.fy);
  return t;
}

Rgba sample_atlas(const Image& raster, UVCoord uv) {
  require(!raster.empty(), "sample_atlas: empty raster");
  const BilinearTaps t = bilinear_taps(raster.width(), raster.height(), uv);
  Rgba out{0, 0, 0, 0};
  const int c = std::min(raster.channels(), 4);
  for (int k = 0; k < c; ++k) {
    const double top = (1.0 - t.fx) * raster.at(t.x0, t.y0, k) + t.fx * raster.at(t.x1, t.y0, k);
    const double bot = (1.0 - t.fx) * raster.at(t.x0, t.y1, k) + t.fx * raster.at(t.x1, t.y1, k);
    out[k] = (1.0 - t.fy) * top + t.fy * bot;
  }
  return out;
}

Rgb reconstruct_pixel(const Rgb& c_f, const Rgb& c_b, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("alpha outside [0,1]");
  return {(1.0 - alpha) * c_b[0] + alpha * c_f[0], (1.0 - alpha) * c_b[1] + alpha * c_f[1],
          (1.0 - alpha) * c_b[2] + alpha * c_f[2]};
}

namespace {

Rgb blended_color(const AtlasSet& atlas, int x, int y, int t) {
  const Rgba f = sample_atlas(atlas.fg_rgba, atlas.uv(Layer::kForeground, x, y, t));
  const Rgba b = sample_atlas(atlas.bg_rgba, atlas.uv(Layer::kBackground, x, y, t));
  return reconstruct_pixel({f[0], f[1], f[2]}, {b[0], b[1], b[2]}, atlas.alpha[atlas.pixel_index(x, y, t)]);
}

bool reaches(const Mask& touched, const BilinearTaps& t) {
  const bool wx0 = t.fx < 1.0, wx1 = t.fx > 0.0, wy0 = t.fy < 1.0, wy1 = t.fy > 0.0;
  return (wx0 && wy0 && touched.at(t.x0, t.y0)) || (wx1 && wy0 && touched.at(t.x1, t.y0)) ||
         (wx0 && wy1 && touched.at(t.x0, t.y1)) || (wx1 && wy1 && touched.at(t.x1, t.y1));
}

}  // namespace

VideoClip reconstruct_video(const AtlasSet& atlas) {
  atlas.validate();
  VideoClip clip;
  clip.frames.reserve(atlas.frames);
  for (int t = 0; t < atlas.frames; ++t) {
    Image frame(atlas.width, atlas.height, 3);
    for (int y = 0; y < atlas.height; ++y)
      for (int x = 0; x < atlas.width; ++x) {
        const Rgb c = blended_color(atlas, x, y, t);
        for (int k = 0; k < 3; ++k) frame.at(x, y, k) = static_cast<float>(std::clamp(c[k], 0.0, 1.0));
      }
    clip.frames.push_back(std::move(frame));
  }
  return clip;
}

std::vector<Mask> reached_pixels(const AtlasSet& atlas, const TouchedRegion& touched) {
  atlas.validate();
  require(touched.mask.width() == atlas.atlas_size && touched.mask.height() == atlas.atlas_size,
          "touched region must match the atlas dimensions");
  std::vector<Mask> reached;
  reached.reserve(atlas.frames);
  const bool any = count_set(touched.mask) > 0;
  for (int t = 0; t < atlas.frames; ++t) {
    Mask m(atlas.width, atlas.height, 1);
    if (any)
      for (int y = 0; y < atlas.height; ++y)
        for (int x = 0; x < atlas.width; ++x) {
          const float a = atlas.alpha[atlas.pixel_index(x, y, t)];
          const bool visible = touched.layer == Layer::kForeground ? a > 0.0f : a < 1.0f;
          if (!visible) continue;
          const BilinearTaps taps = bilinear_taps(atlas.atlas_size, atlas.atlas_size, atlas.uv(touched.layer, x, y, t));
          if (reaches(touched.mask, taps)) m.at(x, y) = 1;
        }
    reached.push_back(std::move(m));
  }
  return reached;
}

VideoClip composite_edit_layer(const VideoClip& original, const AtlasSet& edited_atlas, const TouchedRegion& touched) {
  require(original.frame_count() == edited_atlas.frames && original.width() == edited_atlas.width &&
              original.height() == edited_atlas.height,
          "composite: video does not match the atlas source dimensions");
  const std::vector<Mask> reached = reached_pixels(edited_atlas, touched);
  VideoClip out = original;
  for (int t = 0; t < out.frame_count(); ++t)
    for (int y = 0; y < edited_atlas.height; ++y)
      for (int x = 0; x < edited_atlas.width; ++x) {
        if (!reached[t].at(x, y)) continue;
        const Rgb c = blended_color(edited_atlas, x, y, t);
        for (int k = 0; k < 3; ++k) out.frames[t].at(x, y, k) = static_cast<float>(std::clamp(c[k], 0.0, 1.0));
      }
  return out;
}

}  // namespace atlasedit
