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
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "atlasedit/config.hpp"
#include "atlasedit/container.hpp"
#include "atlasedit/edit.hpp"
#include "atlasedit/metrics.hpp"

namespace atlasedit {

/// Flags shared by every command.
struct CommonOptions {
  std::optional<std::filesystem::path> config;
  std::string providers = "stub";  // stub | remote
  std::optional<std::uint64_t> seed;
  std::filesystem::path out = ".";
};

AppConfig resolve_config(const CommonOptions& options);
Providers build_providers(const std::string& flag, const AppConfig& config);
nlohmann::json descriptors_json(const Providers& providers);

struct DecomposeOutcome {
  AtlasSet atlas;
  std::filesystem::path container;
};

/// Fits an atlas to a frames directory and writes the container into
/// options.out. Throws DomainError after writing when the fit did not
/// converge.
DecomposeOutcome cmd_decompose(const std::filesystem::path& frames_dir, const CommonOptions& options);

struct EditOptions {
  std::filesystem::path request;
  std::optional<int> samples;
  bool no_mask = false;
  bool no_hed = false;
};

struct EditOutcome {
  EditResult result;
  EditRequest request;
  nlohmann::json manifest;
};

EditOutcome cmd_edit(const std::filesystem::path& atlas_path, const EditOptions& edit, const CommonOptions& options);

/// Original frames of a container: the recorded source when readable, else
/// the atlas reconstruction.
VideoClip load_original(const AtlasContainer& container);

/// Writes every edit artifact under `dir` and returns the edit manifest
/// (also written to dir/edit_manifest.json).
nlohmann::json write_edit_artifacts(const std::filesystem::path& dir, const EditResult& result,
                                    const EditRequest& request, const Providers& providers);

/// Manifest without wall-clock fields, for reproducibility checks.
nlohmann::json without_timings(nlohmann::json manifest);

struct EvaluateOutcome {
  MetricsReport report;
  bool all_failed = false;
};

/// Scores the pairs listed in a JSON spec; writes metrics.json and metrics.csv.
EvaluateOutcome cmd_evaluate(const std::filesystem::path& pairs_spec, const CommonOptions& options);
std::vector<ScoredVideoPair> load_pairs(const std::filesystem::path& pairs_spec, const Captioner* captioner,
                                        bool* masked);
nlohmann::json to_json(const MetricsReport& report);
std::string to_csv(const MetricsReport& report);

struct SweepPoint {
  double rho = 0.0;
  double lambda = 0.0;
  double divergence = 0.0;  // in-mask L2 between x_0 and sample 0
  std::size_t touched_texels = 0;
  double video_psnr = 0.0;
  std::filesystem::path dir;
};

/// In-mask L2 distance between two patches at working resolution.
double in_mask_divergence(const Image& edited, const Image& source, const Mask& mask);

std::vector<SweepPoint> cmd_sweep(const std::filesystem::path& atlas_path, const std::filesystem::path& request,
                                  const std::filesystem::path& grid_spec, const CommonOptions& options);

}  // namespace atlasedit
