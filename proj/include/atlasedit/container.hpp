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

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "atlasedit/atlas.hpp"

namespace atlasedit {

/// Named float32 array of an NPZ archive.
struct NpyArray {
  std::vector<std::size_t> shape;
  std::vector<float> data;
};

/// Uncompressed NPZ (zip of .npy files) with fixed timestamps, so equal
/// inputs give byte-identical archives.
std::vector<std::uint8_t> encode_npz(const std::map<std::string, NpyArray>& arrays);
std::map<std::string, NpyArray> decode_npz(const std::vector<std::uint8_t>& bytes);

struct AtlasContainer {
  AtlasSet atlas;
  std::optional<std::filesystem::path> source_frames;
};

/// Writes <dir>/atlas.npz and the <dir>/atlas.json sidecar.
void save_atlas(const std::filesystem::path& dir, const AtlasSet& atlas,
                const std::optional<std::filesystem::path>& source_frames);
/// Accepts the directory, the .npz or the .json path.
AtlasContainer load_atlas(const std::filesystem::path& path);
nlohmann::json atlas_sidecar(const AtlasSet& atlas, const std::optional<std::filesystem::path>& source_frames);

/// Append-only JSON-lines journal. Each record gets a sequence number.
class ManifestJournal {
 public:
  explicit ManifestJournal(std::filesystem::path path);
  nlohmann::json append(nlohmann::json record);
  std::vector<nlohmann::json> read() const;
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
  mutable std::mutex mutex_;
};

/// Project state folded from the manifest journal. Later records add to
/// earlier ones; the config snapshot is the first one journaled.
struct ProjectManifest {
  std::filesystem::path project_dir;
  std::optional<std::filesystem::path> video_source;
  std::optional<std::filesystem::path> atlas_container;
  std::vector<std::filesystem::path> edit_manifests;
  std::vector<std::filesystem::path> metrics_reports;
  std::vector<nlohmann::json> providers;
  nlohmann::json config;
  std::optional<std::filesystem::path> accepted_frames;
  std::vector<std::string> missing;  // referenced files that do not exist

  nlohmann::json to_json() const;
};

ProjectManifest fold_manifest(const std::filesystem::path& project_dir);
std::filesystem::path manifest_path(const std::filesystem::path& project_dir);
/// `p` relative to `base` when it lies below it, else absolute.
std::string relative_to(const std::filesystem::path& p, const std::filesystem::path& base);

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::vector<std::uint8_t> read_binary_file(const std::filesystem::path& path);

}  // namespace atlasedit
