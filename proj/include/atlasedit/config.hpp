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

#include <json.hpp>

#include "atlasedit/atlas.hpp"
#include "atlasedit/edit.hpp"
#include "atlasedit/stubs.hpp"

namespace atlasedit {

using Json = nlohmann::json;

struct ProviderSettings {
  std::uint64_t seed = 0;
  std::vector<LabelRule> label_rules;
  double edge_gain = 0.2;
  double timeout_seconds = 120.0;
  int pool_size = 4;
};

struct EditDefaults {
  double rho = 1.0;
  double lambda_hed = 1.0;
  double guidance_scale = 7.5;
  int num_samples = 1;
};

struct AppConfig {
  CoordinateNetworkConfig nla;
  PipelineConfig pipeline;
  EditDefaults defaults;
  ProviderSettings providers;
  double psnr_peak = 1.0;
  int serve_workers = 2;

  void validate() const;
};

/// Reads a JSON config. Missing keys keep their defaults; unknown keys are rejected.
AppConfig load_config(const std::filesystem::path& path);
AppConfig parse_config(const Json& j);
Json to_json(const AppConfig& config);

Json to_json(const CoordinateNetworkConfig& c);
CoordinateNetworkConfig nla_config_from_json(const Json& j);

/// Parses an edit request; absent fields take `defaults`.
EditRequest parse_edit_request(const Json& j, const EditDefaults& defaults = {});
Json to_json(const EditRequest& r);

Json read_json_file(const std::filesystem::path& path);

}  // namespace atlasedit
