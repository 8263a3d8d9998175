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
#include <functional>

#include "atlasedit/atlas.hpp"

namespace atlasedit {

struct TrainProgress {
  int iteration = 0;
  double loss = 0.0;
};

/// Fits a foreground/background layered atlas to `video`.
///
/// Mapping networks take sinusoidal encodings of normalized (x, y, t) and
/// predict a UV offset from the identity placement (foreground, background)
/// or an opacity logit. Atlas colors live on trainable texel grids that are
/// resampled to S x S rasters once training ends; UV and opacity tables are
/// evaluated once and frozen.
///
/// Deterministic for a given seed. A constant clip is fitted analytically.
/// Failing to reach config.target_psnr leaves report.converged == false.
AtlasSet train_nla(const VideoClip& video, const CoordinateNetworkConfig& config, std::uint64_t seed,
                   const std::function<void(const TrainProgress&)>& progress = {});

/// Identity placement of pixel (x, y) into [-1,1]^2.
UVCoord identity_uv(int x, int y, int width, int height) noexcept;

}  // namespace atlasedit
