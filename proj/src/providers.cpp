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


#include "atlasedit/providers.hpp"

#include <array>
#include <utility>

namespace atlasedit {

namespace {
constexpr std::array<std::pair<ProviderKind, const char*>, 7> kKindNames{{
    {ProviderKind::kSegmenter, "segmenter"},
    {ProviderKind::kEdgeDetector, "edge_detector"},
    {ProviderKind::kEmbedder, "embedder"},
    {ProviderKind::kCaptioner, "captioner"},
    {ProviderKind::kNoisePredictor, "noise_predictor"},
    {ProviderKind::kStateEncoder, "state_encoder"},
    {ProviderKind::kFeatureExtractor, "feature_extractor"},
}};
}  // namespace

std::string to_string(ProviderKind kind) {
  for (const auto& [k, name] : kKindNames)
    if (k == kind) return name;
  return "unknown";
}

ProviderKind parse_provider_kind(const std::string& name) {
  for (const auto& [k, n] : kKindNames)
    if (name == n) return k;
  throw InvalidArgument("unknown provider kind '" + name + "'");
}

void ProviderDescriptor::validate() const {
  require(!name.empty(), "provider descriptor needs a name");
  if (name.rfind("remote", 0) == 0) require(endpoint.has_value() && !endpoint->empty(), "remote provider needs an endpoint");
}

Provider::Provider(ProviderDescriptor descriptor) : descriptor_(std::move(descriptor)) { descriptor_.validate(); }

std::vector<ProviderDescriptor> Providers::descriptors() const {
  std::vector<ProviderDescriptor> out;
  auto add = [&](const auto& p) {
    if (p) out.push_back(p->descriptor());
  };
  add(segmenter);
  add(edge_detector);
  add(embedder);
  add(captioner);
  add(noise_predictor);
  add(state_encoder);
  add(feature_extractor);
  return out;
}

}  // namespace atlasedit
