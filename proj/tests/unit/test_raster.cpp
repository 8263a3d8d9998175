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

#include "atlasedit/raster.hpp"
#include "atlasedit/video.hpp"
#include "fixtures.hpp"

using namespace atlasedit;

TEST_SUITE("raster") {
  TEST_CASE("same-size resize is the identity") {
    const Image img = fixtures::sine_image(13, 9);
    CHECK(resize_bilinear(img, 13, 9) == img);
    CHECK(resize_area(img, 13, 9) == img);
  }

  TEST_CASE("area resize of a constant image stays constant") {
    const Image img = fixtures::solid(17, 11, {0.25f, 0.5f, 0.75f});
    const Image out = resize_area(img, 5, 4);
    for (float v : out.data()) CHECK((v == doctest::Approx(0.25) || v == doctest::Approx(0.5) || v == doctest::Approx(0.75)));
  }

  TEST_CASE("max_pool keeps any covered texel") {
    Mask m(8, 8, 1);
    m.at(5, 6) = 1;
    const Mask p = max_pool(m, 2, 2);
    CHECK(count_set(p) == 1);
    CHECK(p.at(1, 1) == 1);
  }

  TEST_CASE("bounding box and dilation") {
    Mask m(10, 10, 1);
    CHECK(bounding_box(m).empty());
    m.at(3, 4) = 1;
    m.at(6, 5) = 1;
    CHECK(bounding_box(m) == Rect{3, 4, 4, 2});
    const Mask d = dilate(m, 1);
    CHECK(count_set(d) == 10);
    CHECK(d.at(3, 3) == 1);
    CHECK(d.at(2, 3) == 0);
  }

  TEST_CASE("crop then paste restores the source") {
    const Image img = fixtures::sine_image(12, 10);
    const Rect r{2, 3, 5, 4};
    const Image c = crop(img, r);
    CHECK(c.width() == 5);
    Image blank(12, 10, 3);
    paste(blank, c, r.x, r.y);
    for (int y = r.y; y < r.bottom(); ++y)
      for (int x = r.x; x < r.right(); ++x)
        for (int k = 0; k < 3; ++k) CHECK(blank.at(x, y, k) == img.at(x, y, k));
    CHECK_THROWS_AS(crop(img, Rect{10, 0, 5, 5}), InvalidArgument);
  }

  TEST_CASE("select takes inside where the mask is set") {
    const Image a = fixtures::solid(4, 4, {1, 0, 0});
    const Image b = fixtures::solid(4, 4, {0, 0, 1});
    Mask m(4, 4, 1);
    m.at(1, 2) = 1;
    const Image s = select(m, a, b);
    CHECK(s.at(1, 2, 0) == 1.0f);
    CHECK(s.at(0, 0, 2) == 1.0f);
  }

  TEST_CASE("state conversion round trips exactly") {
    const Image img = fixtures::sine_image(7, 5);
    CHECK(to_image(to_state(img), false) == img);
  }

  TEST_CASE("png round trip equals 8-bit quantization") {
    fixtures::TempDir dir("png");
    const Image img = fixtures::sine_image(9, 6);
    write_png(dir / "a.png", img);
    const Image back = read_png(dir / "a.png");
    REQUIRE(back.same_shape(img));
    for (std::size_t i = 0; i < img.size(); ++i) CHECK(back.data()[i] == quantize8(img.data()[i]));
  }

  TEST_CASE("frames directory round trip and validation") {
    fixtures::TempDir dir("frames");
    VideoClip clip;
    clip.frames = {fixtures::solid(6, 4, {0, 0, 0}), fixtures::solid(6, 4, {1, 1, 1})};
    write_frames(dir.path(), clip);
    const VideoClip back = read_frames(dir.path());
    CHECK(back.frame_count() == 2);
    CHECK(back.frames[1] == clip.frames[1]);
    CHECK_THROWS_AS(read_frames(dir / "missing"), InvalidArgument);
    VideoClip one;
    one.frames = {clip.frames[0]};
    CHECK_THROWS_AS(one.validate(), InvalidArgument);
  }
}
