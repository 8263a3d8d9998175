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
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "atlasedit/atlas.hpp"
#include "atlasedit/providers.hpp"
#include "atlasedit/schedule.hpp"

namespace atlasedit {

struct EditRequest {
  std::vector<std::string> source_tokens;
  std::string target_prompt;
  double rho = 1.0;
  double lambda_hed = 1.0;
  std::uint64_t seed = 0;
  double guidance_scale = 7.5;
  bool use_mask = true;
  bool use_hed = true;
  int num_samples = 1;
  std::optional<Layer> layer;  // overrides token-based layer selection

  void validate() const;
};

struct PipelineConfig {
  ScheduleConfig schedule;
  int working_resolution = 512;
  double crop_padding = 0.1;  // fraction of the box side added on each side
  int mask_dilation = 0;      // texels, at working resolution
  std::vector<std::string> foreground_classes{"blob", "person", "car", "animal", "dog", "cat", "horse", "bird",
                                              "object", "square"};

  void validate() const;
};

struct EditPatch {
  Layer layer = Layer::kForeground;
  Rect bbox;       // atlas texels
  Image source;    // bbox crop at working resolution, RGB
  State x0;
  Mask mask;       // working resolution, values in {0,1}
  Image hed;       // working resolution, 1 channel
};

/// RGB * alpha + white * (1 - alpha) per texel.
Image blend_atlas_for_segmentation(const Image& atlas_rgba);

Layer select_layer(const std::vector<std::string>& tokens, const std::vector<std::string>& foreground_classes);

struct LocateOptions {
  int working_resolution = 512;
  double padding = 0.1;
  int dilation = 0;
};

struct LocatedRegion {
  Rect bbox;
  Mask mask;        // working resolution
  Mask atlas_mask;  // union of matching segments on the full atlas
};

/// Square, padded crop around every segment whose label matches a token,
/// with the mask re-inferred on the crop. Throws NotFound naming the tokens.
LocatedRegion locate_region(const Image& blended_atlas, const std::vector<std::string>& source_tokens,
                            const Segmenter& segmenter, const LocateOptions& options = {});

/// Square box around `tight`, padded by `padding` of its side on every side,
/// shifted (and if needed clipped) to lie within width x height.
Rect square_crop(const Rect& tight, double padding, int width, int height);

struct MarginalCoefficients {
  double mean_coeff = 1.0;  // sqrt(alpha_bar)
  double stddev = 0.0;      // sqrt(1 - alpha_bar)
};

/// Closed-form forward marginal q(x_t | x_0) on the inference map.
class ForwardMarginal {
 public:
  ForwardMarginal(State x0, const NoiseSchedule* schedule, std::mt19937_64* rng);
  MarginalCoefficients coefficients(int index) const;
  /// Fresh draw of x at inference index `index`.
  State sample(int index) const;
  /// Deterministic x at `index` for the given noise.
  State at(int index, const State& epsilon) const;

 private:
  State x0_;
  const NoiseSchedule* schedule_;
  std::mt19937_64* rng_;
};

struct NoisedPatch {
  State x_t;
  int start_index = 0;  // lround(rho * N_infer)
  ForwardMarginal marginal;
};

/// `schedule` and `rng` must outlive the returned marginal.
NoisedPatch noise_patch(const State& x0, double rho, const NoiseSchedule& schedule, std::mt19937_64& rng);

/// One DDIM step from inference index `index` to `index - 1`, with a single
/// noise-predictor evaluation.
State ddim_step(const State& y, int index, const NoiseSchedule& schedule, const Conditioning& cond,
                const NoisePredictor& predictor);

/// (y - sqrt(1 - alpha_bar) eps) / sqrt(alpha_bar).
State predicted_x0(const State& y, const State& eps, double alpha_bar);

/// mask * y + (1 - mask) * x. The mask is max-pooled to the state extent.
State masked_blend(const State& y_prev, const State& x_prev, const Mask& mask);

/// Runs noise + DDIM decode for every sample, returning decoded patches.
std::vector<Image> edit_patch(const EditPatch& patch, const EditRequest& request, const NoiseSchedule& schedule,
                              const Providers& providers);

struct PasteResult {
  AtlasSet atlas;
  TouchedRegion touched;
};

/// Writes the change `edited - working_crop` (resampled to the bbox) into a
/// copy of the layer. Texels with no change keep their exact value and stay
/// out of the touched region.
PasteResult paste_patch(const AtlasSet& atlas, Layer layer, const Image& edited, const Rect& bbox);

/// RGB crop of `atlas_rgba` resampled to width x height, as edit_patch sees it.
Image working_crop(const Image& atlas_rgba, const Rect& bbox, int width, int height);

struct EditSample {
  Image patch;
  AtlasSet atlas;
  TouchedRegion touched;
  VideoClip video;
};

struct EditResult {
  Layer layer = Layer::kForeground;
  Image blended_atlas;
  EditPatch patch;
  std::vector<EditSample> samples;
  std::map<std::string, double> timings;  // seconds per stage
};

/// Full atlas edit: layer choice, localisation, edge extraction, diffusion
/// decode, paste-back and compositing over `original`.
EditResult edit_video(const AtlasSet& atlas, const VideoClip& original, const EditRequest& request,
                      const Providers& providers, const PipelineConfig& config);

/// Fits an atlas first, then edits.
EditResult edit_video(const VideoClip& video, const CoordinateNetworkConfig& nla_config, std::uint64_t nla_seed,
                      const EditRequest& request, const Providers& providers, const PipelineConfig& config);

}  // namespace atlasedit
