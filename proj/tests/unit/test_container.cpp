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

#include <fstream>

#include "atlasedit/container.hpp"
#include "fixtures.hpp"

using namespace atlasedit;

TEST_SUITE("container") {
  TEST_CASE("npz round trip and numpy header layout") {
    std::map<std::string, NpyArray> arrays;
    arrays["a"] = {{2, 3}, {1, 2, 3, 4, 5, 6}};
    arrays["v"] = {{4}, {0.5f, -1.0f, 2.0f, 3.5f}};
    const auto bytes = encode_npz(arrays);
    const auto back = decode_npz(bytes);
    REQUIRE(back.size() == 2);
    CHECK(back.at("a").shape == std::vector<std::size_t>{2, 3});
    CHECK(back.at("a").data == arrays["a"].data);
    CHECK(back.at("v").shape == std::vector<std::size_t>{4});
    const std::string text(bytes.begin(), bytes.end());
    CHECK(text.find("'shape': (2, 3)") != std::string::npos);
    CHECK(text.find("'shape': (4,)") != std::string::npos);
    CHECK(encode_npz(arrays) == bytes);
  }

  TEST_CASE("npz corruption is detected") {
    std::map<std::string, NpyArray> arrays;
    arrays["a"] = {{2}, {1, 2}};
    auto bytes = encode_npz(arrays);
    bytes[100] ^= 0xFF;
    CHECK_THROWS_AS(decode_npz(bytes), InvalidArgument);
    CHECK_THROWS_AS(decode_npz({1, 2, 3}), InvalidArgument);
    CHECK_THROWS_AS(encode_npz({{"x", {{3}, {1, 2}}}}), InvalidArgument);
  }

  TEST_CASE("atlas container round trip is exact and deterministic") {
    fixtures::TempDir a("ctr_a"), b("ctr_b");
    const AtlasSet atlas = fixtures::square_atlas();
    save_atlas(a.path(), atlas, std::filesystem::path("/data/frames"));
    save_atlas(b.path(), atlas, std::filesystem::path("/data/frames"));
    CHECK(read_binary_file(a / "atlas.npz") == read_binary_file(b / "atlas.npz"));
    CHECK(read_binary_file(a / "atlas.json") == read_binary_file(b / "atlas.json"));
    for (const auto& p : {a.path(), a / "atlas.npz", a / "atlas.json"}) {
      const AtlasContainer c = load_atlas(p);
      CHECK(c.atlas.fg_rgba == atlas.fg_rgba);
      CHECK(c.atlas.bg_rgba == atlas.bg_rgba);
      CHECK(c.atlas.uv_fg == atlas.uv_fg);
      CHECK(c.atlas.uv_bg == atlas.uv_bg);
      CHECK(c.atlas.alpha == atlas.alpha);
      CHECK(c.atlas.network_weights == atlas.network_weights);
      CHECK(c.atlas.report.psnr == atlas.report.psnr);
      CHECK(c.atlas.seed == atlas.seed);
      REQUIRE(c.source_frames.has_value());
      CHECK(*c.source_frames == "/data/frames");
    }
    CHECK_THROWS_AS(load_atlas(a / "nowhere"), InvalidArgument);
  }

  TEST_CASE("infinite PSNR survives the sidecar") {
    fixtures::TempDir d("ctr_inf");
    AtlasSet atlas = fixtures::square_atlas();
    atlas.report.psnr = std::numeric_limits<double>::infinity();
    save_atlas(d.path(), atlas, std::nullopt);
    const AtlasContainer c = load_atlas(d.path());
    CHECK(std::isinf(c.atlas.report.psnr));
    CHECK_FALSE(c.source_frames.has_value());
  }

  TEST_CASE("journal appends with sequence numbers and folds into a project") {
    fixtures::TempDir d("journal");
    ManifestJournal j(manifest_path(d.path()));
    save_atlas(d.path(), fixtures::square_atlas(), std::nullopt);
    j.append({{"event", "decompose"}, {"atlas", "atlas.npz"}, {"config", {{"k", 1}}}, {"providers", nlohmann::json::array()}});
    j.append({{"event", "edit"},
              {"manifest", "edits/e1/edit_manifest.json"},
              {"config", {{"k", 2}}},
              {"providers", {{{"kind", "segmenter"}}}}});
    j.append({{"event", "evaluate"}, {"report", "/nonexistent/metrics.json"}});
    const auto records = j.read();
    REQUIRE(records.size() == 3);
    for (int i = 0; i < 3; ++i) CHECK(records[i].at("seq") == i);

    const std::string before = [&] {
      std::ifstream in(j.path());
      return std::string(std::istreambuf_iterator<char>(in), {});
    }();
    j.append({{"event", "note"}});
    std::ifstream in(j.path());
    const std::string after(std::istreambuf_iterator<char>(in), {});
    CHECK(after.substr(0, before.size()) == before);

    const ProjectManifest m = fold_manifest(d.path());
    CHECK(m.atlas_container == d / "atlas.npz");
    CHECK(m.config == nlohmann::json{{"k", 1}});
    CHECK(m.edit_manifests.size() == 1);
    CHECK(m.providers.size() == 1);
    CHECK(m.missing.size() == 2);
    CHECK(m.to_json().at("missing").size() == 2);
  }

  TEST_CASE("relative paths") {
    CHECK(relative_to("/a/b/c.json", "/a") == "b/c.json");
    CHECK(relative_to("/x/c.json", "/a") == "../x/c.json");
  }
}
