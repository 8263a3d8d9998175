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


#include <doctest.h>

#include "atlasedit/atlas.hpp"
#include "atlasedit/edit.hpp"
#include "atlasedit/nla.hpp"
#include "atlasedit/synthetic.hpp"
#include "fixtures.hpp"

using namespace atlasedit;

TEST_SUITE("atlas") {
  TEST_CASE("segmentation blend: opaque texels keep RGB, transparent texels turn white") {
    Image rgba(3, 1, 4);
    const float rgb[3] = {0.2f, 0.4f, 0.6f};
    for (int c = 0; c < 3; ++c) {
      rgba.at(0, 0, c) = rgb[c];
      rgba.at(1, 0, c) = rgb[c];
      rgba.at(2, 0, c) = rgb[c];
    }
    rgba.at(0, 0, 3) = 1.0f;
    rgba.at(1, 0, 3) = 0.0f;
    rgba.at(2, 0, 3) = 0.5f;
    const Image out = blend_atlas_for_segmentation(rgba);
    for (int c = 0; c < 3; ++c) {
      CHECK(out.at(0, 0, c) == rgb[c]);
      CHECK(out.at(1, 0, c) == 1.0f);
      CHECK(out.at(2, 0, c) == doctest::Approx(0.5 * rgb[c] + 0.5));
    }
  }

  TEST_CASE("texel centres sample exactly") {
    const Image img = fixtures::sine_image(9, 7);
    for (int y = 0; y < 7; ++y)
      for (int x = 0; x < 9; ++x) {
        const UVCoord uv{uv_coordinate(x, 9), uv_coordinate(y, 7)};
        const Rgba s = sample_atlas(img, uv);
        for (int c = 0; c < 3; ++c) CHECK(s[c] == static_cast<double>(img.at(x, y, c)));
      }
  }

  TEST_CASE("bilinear midpoint averages neighbours") {
    Image img(2, 1, 1);
    img.at(0, 0) = 0.0f;
    img.at(1, 0) = 1.0f;
    const BilinearTaps t = bilinear_taps(2, 1, {0.0, 0.0});
    CHECK(t.fx == doctest::Approx(0.5));
    CHECK(sample_atlas(img, {0.0, 0.0})[0] == doctest::Approx(0.5));
    CHECK(sample_atlas(img, {5.0, 0.0})[0] == 1.0);
  }

  TEST_CASE("reconstruct_pixel endpoints") {
    const Rgb f{0.9, 0.1, 0.3}, b{0.2, 0.5, 0.7};
    CHECK(reconstruct_pixel(f, b, 1.0) == f);
    CHECK(reconstruct_pixel(f, b, 0.0) == b);
    CHECK(reconstruct_pixel(f, b, 0.25)[0] == doctest::Approx(0.75 * 0.2 + 0.25 * 0.9));
    CHECK_THROWS_AS(reconstruct_pixel(f, b, 1.5), InvalidArgument);
  }

  TEST_CASE("layer names round trip") {
    CHECK(parse_layer(to_string(Layer::kForeground)) == Layer::kForeground);
    CHECK(parse_layer(to_string(Layer::kBackground)) == Layer::kBackground);
    CHECK_THROWS_AS(parse_layer("middle"), InvalidArgument);
  }

  TEST_CASE("fixture atlas reconstructs the moving square exactly") {
    const fixtures::SquareAtlasSpec spec;
    const AtlasSet atlas = fixtures::square_atlas(spec);
    const VideoClip video = reconstruct_video(atlas);
    REQUIRE(video.frame_count() == spec.frames);
    for (int t = 0; t < spec.frames; ++t)
      for (int y = 0; y < spec.size; ++y)
        for (int x = 0; x < spec.size; ++x) {
          const auto expect = fixtures::in_square(spec, x, y, t) ? spec.color : fixtures::background(x, y, spec.size);
          for (int c = 0; c < 3; ++c) CHECK(video.frames[t].at(x, y, c) == expect[c]);
        }
    CHECK_THROWS_AS(map_to_atlas(atlas, {spec.size, 0, 0}), InvalidArgument);
    CHECK(map_to_atlas(atlas, {spec.start_x, spec.start_y, 0}).alpha == 1.0);
  }

  TEST_CASE("compositing leaves unreached pixels bit-identical") {
    const fixtures::SquareAtlasSpec spec;
    AtlasSet atlas = fixtures::square_atlas(spec);
    const VideoClip original = reconstruct_video(atlas);
    TouchedRegion touched{Layer::kForeground, Mask(spec.size, spec.size, 1)};
    for (int y = spec.start_y; y < spec.start_y + 4; ++y)
      for (int x = spec.start_x; x < spec.start_x + 4; ++x) {
        touched.mask.at(x, y) = 1;
        atlas.fg_rgba.at(x, y, 2) = 1.0f;
      }
    const VideoClip out = composite_edit_layer(original, atlas, touched);
    const auto reached = reached_pixels(atlas, touched);
    int changed = 0;
    for (int t = 0; t < spec.frames; ++t)
      for (int y = 0; y < spec.size; ++y)
        for (int x = 0; x < spec.size; ++x) {
          const bool differs = out.frames[t].pixel(x, y)[2] != original.frames[t].pixel(x, y)[2];
          if (!reached[t].at(x, y)) {
            for (int c = 0; c < 3; ++c) CHECK(out.frames[t].at(x, y, c) == original.frames[t].at(x, y, c));
          }
          changed += differs;
        }
    CHECK(changed == 16 * spec.frames);
  }

  TEST_CASE("background edits stay hidden behind an opaque foreground") {
    const fixtures::SquareAtlasSpec spec;
    AtlasSet atlas = fixtures::square_atlas(spec);
    const VideoClip original = reconstruct_video(atlas);
    TouchedRegion touched{Layer::kBackground, Mask(spec.size, spec.size, 1)};
    for (int y = 0; y < spec.size; ++y)
      for (int x = 0; x < spec.size; ++x) {
        touched.mask.at(x, y) = 1;
        atlas.bg_rgba.at(x, y, 0) = 0.0f;
      }
    const VideoClip out = composite_edit_layer(original, atlas, touched);
    for (int t = 0; t < spec.frames; ++t)
      for (int y = 0; y < spec.size; ++y)
        for (int x = 0; x < spec.size; ++x)
          if (fixtures::in_square(spec, x, y, t))
            CHECK(out.frames[t].at(x, y, 0) == original.frames[t].at(x, y, 0));
          else
            CHECK(out.frames[t].at(x, y, 0) == 0.0f);
  }
}

TEST_SUITE("nla") {
  TEST_CASE("identity placement spans the unit square") {
    const UVCoord a = identity_uv(0, 0, 5, 3), b = identity_uv(4, 2, 5, 3);
    CHECK(a.u == -1.0);
    CHECK(a.v == -1.0);
    CHECK(b.u == 1.0);
    CHECK(b.v == 1.0);
  }

  TEST_CASE("a constant clip is fitted analytically") {
    const auto clip = make_constant_clip(16, 12, 3, {0.2f, 0.4f, 0.6f}).clip;
    const AtlasSet a = train_nla(clip, {}, 0);
    CHECK(a.report.trivial);
    CHECK(a.report.converged);
    const VideoClip r = reconstruct_video(a);
    for (int t = 0; t < 3; ++t) CHECK(r.frames[t] == clip.frames[t]);
  }

  TEST_CASE("invalid configurations and inputs are rejected") {
    CoordinateNetworkConfig c;
    c.iterations = 0;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    VideoClip one;
    one.frames = {fixtures::solid(8, 8, {0, 0, 0})};
    CHECK_THROWS_AS(train_nla(one, {}, 0), InvalidArgument);
  }

  TEST_CASE("reduced fit is deterministic per seed") {
    SquareClipSpec s;
    s.width = s.height = 24;
    s.frames = 4;
    s.square = 6;
    s.start_y = 9;
    const auto clip = make_translating_square_clip(s).clip;
    CoordinateNetworkConfig c;
    c.iterations = 60;
    c.hidden_width = 16;
    c.mapping_hidden_width = 16;
    c.atlas_size = 32;
    c.batch_size = 256;
    const AtlasSet a = train_nla(clip, c, 5), b = train_nla(clip, c, 5), d = train_nla(clip, c, 6);
    CHECK(a.network_weights == b.network_weights);
    CHECK(a.fg_rgba == b.fg_rgba);
    CHECK(a.alpha == b.alpha);
    CHECK(a.network_weights != d.network_weights);
    for (float v : a.alpha) CHECK((v >= 0.0f && v <= 1.0f));
  }
}
