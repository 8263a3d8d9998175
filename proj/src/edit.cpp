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


#include "atlasedit/edit.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>

#include "atlasedit/nla.hpp"
#include "atlasedit/rng.hpp"

namespace atlasedit {

namespace {

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

bool contains_token(const std::vector<std::string>& tokens, const std::string& label) {
  const std::string l = lower(label);
  return std::any_of(tokens.begin(), tokens.end(), [&](const std::string& t) { return lower(t) == l; });
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : ", ") + s;
  return out;
}

class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

}  // namespace

void EditRequest::validate() const {
  require(rho >= 0.0 && rho <= 1.0, "rho must lie in [0,1]");
  require(lambda_hed >= 0.0, "lambda must be non-negative");
  require(guidance_scale >= 1.0, "guidance scale must be at least 1");
  require(num_samples >= 1, "num_samples must be at least 1");
  require(!source_tokens.empty() || layer.has_value(), "edit request needs source tokens");
}

void PipelineConfig::validate() const {
  schedule.validate();
  require(working_resolution >= 8, "working resolution must be at least 8");
  require(crop_padding >= 0.0, "crop padding must be non-negative");
  require(mask_dilation >= 0, "mask dilation must be non-negative");
}

Image blend_atlas_for_segmentation(const Image& atlas_rgba) {
  require(atlas_rgba.channels() == 4, "blend_atlas_for_segmentation expects RGBA");
  Image out(atlas_rgba.width(), atlas_rgba.height(), 3);
  for (int y = 0; y < atlas_rgba.height(); ++y)
    for (int x = 0; x < atlas_rgba.width(); ++x) {
      const double a = atlas_rgba.at(x, y, 3);
      for (int c = 0; c < 3; ++c)
        out.at(x, y, c) = static_cast<float>(atlas_rgba.at(x, y, c) * a + 1.0 * (1.0 - a));
    }
  return out;
}

Layer select_layer(const std::vector<std::string>& tokens, const std::vector<std::string>& foreground_classes) {
  for (const auto& t : tokens)
    if (contains_token(foreground_classes, t)) return Layer::kForeground;
  return Layer::kBackground;
}

Rect square_crop(const Rect& tight, double padding, int width, int height) {
  require(!tight.empty(), "square_crop: empty box");
  const int longest = std::max(tight.width, tight.height);
  int side = static_cast<int>(std::ceil(longest * (1.0 + 2.0 * padding) - 1e-9));
  side = std::min({std::max(side, longest), width, height});
  auto place = [side](int start, int extent, int limit) {
    const int s = start + static_cast<int>(std::floor((extent - side) / 2.0));
    return std::clamp(s, 0, limit - side);
  };
  return {place(tight.x, tight.width, width), place(tight.y, tight.height, height), side, side};
}

LocatedRegion locate_region(const Image& blended_atlas, const std::vector<std::string>& source_tokens,
                            const Segmenter& segmenter, const LocateOptions& options) {
  require(options.working_resolution > 0, "working resolution must be positive");
  auto union_of = [&](const std::vector<Segment>& segments, int w, int h) {
    Mask m(w, h, 1);
    bool any = false;
    for (const auto& s : segments) {
      if (!contains_token(source_tokens, s.label)) continue;
      require(s.mask.same_extent(m), "segment mask dims differ from the image");
      any = true;
      for (std::size_t i = 0; i < m.size(); ++i)
        if (s.mask.data()[i]) m.data()[i] = 1;
    }
    return std::make_pair(any, m);
  };

  auto [found, full] = union_of(segmenter.segment(blended_atlas), blended_atlas.width(), blended_atlas.height());
  const Rect tight = bounding_box(full);
  if (!found || tight.empty()) throw NotFound("no segment matches tokens: " + join(source_tokens));

  LocatedRegion out;
  out.atlas_mask = full;
  out.bbox = square_crop(tight, options.padding, blended_atlas.width(), blended_atlas.height());
  const Image patch = crop(blended_atlas, out.bbox);
  auto [refound, local] = union_of(segmenter.segment(patch), patch.width(), patch.height());
  if (!refound || count_set(local) == 0) local = crop(full, out.bbox);
  out.mask = resize_nearest(local, options.working_resolution, options.working_resolution);
  if (options.dilation > 0) out.mask = dilate(out.mask, options.dilation);
  return out;
}

ForwardMarginal::ForwardMarginal(State x0, const NoiseSchedule* schedule, std::mt19937_64* rng)
    : x0_(std::move(x0)), schedule_(schedule), rng_(rng) {}

MarginalCoefficients ForwardMarginal::coefficients(int index) const {
  const double ab = schedule_->alpha_bar_at(index);
  return {std::sqrt(ab), std::sqrt(1.0 - ab)};
}

State ForwardMarginal::at(int index, const State& epsilon) const {
  require(epsilon.same_shape(x0_), "forward marginal: noise shape differs");
  const auto k = coefficients(index);
  State out(x0_.width(), x0_.height(), x0_.channels());
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = k.mean_coeff * x0_.data()[i] + k.stddev * epsilon.data()[i];
  return out;
}

State ForwardMarginal::sample(int index) const {
  State eps(x0_.width(), x0_.height(), x0_.channels());
  fill_normal(eps, *rng_);
  return at(index, eps);
}

NoisedPatch noise_patch(const State& x0, double rho, const NoiseSchedule& schedule, std::mt19937_64& rng) {
  require(rho >= 0.0 && rho <= 1.0, "rho must lie in [0,1]");
  const int start = static_cast<int>(std::lround(rho * schedule.inference_steps()));
  ForwardMarginal marginal(x0, &schedule, &rng);
  State x_t = marginal.sample(start);
  return {std::move(x_t), start, std::move(marginal)};
}

State predicted_x0(const State& y, const State& eps, double alpha_bar) {
  require(y.same_shape(eps), "noise estimate shape differs from the state");
  State out(y.width(), y.height(), y.channels());
  const double s = std::sqrt(1.0 - alpha_bar), a = std::sqrt(alpha_bar);
  for (std::size_t i = 0; i < y.size(); ++i) out.data()[i] = (y.data()[i] - s * eps.data()[i]) / a;
  return out;
}

State ddim_step(const State& y, int index, const NoiseSchedule& schedule, const Conditioning& cond,
                const NoisePredictor& predictor) {
  require(index > 0, "ddim_step needs an inference index above 0");
  const int t = schedule.timestep(index);
  const double ab = schedule.alpha_bar(t);
  const double ab_prev = schedule.alpha_bar_at(index - 1);
  const State eps = predictor.predict(y, t, cond);
  if (!eps.same_shape(y))
    throw ProviderError(predictor.descriptor().name, "noise estimate shape differs from the state");
  State out = predicted_x0(y, eps, ab);
  const double a_prev = std::sqrt(ab_prev), s_prev = std::sqrt(1.0 - ab_prev);
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = a_prev * out.data()[i] + s_prev * eps.data()[i];
  return out;
}

State masked_blend(const State& y_prev, const State& x_prev, const Mask& mask) {
  require(y_prev.same_shape(x_prev), "masked_blend: state shapes differ");
  require(!mask.empty() && mask.channels() == 1, "masked_blend: needs a single-channel mask");
  const Mask m = mask.same_extent(y_prev) ? mask : max_pool(mask, y_prev.width(), y_prev.height());
  State out = x_prev;
  const int ch = y_prev.channels();
  for (int y = 0; y < y_prev.height(); ++y)
    for (int x = 0; x < y_prev.width(); ++x)
      if (m.at(x, y))
        for (int c = 0; c < ch; ++c) out.at(x, y, c) = y_prev.at(x, y, c);
  return out;
}

std::vector<Image> edit_patch(const EditPatch& patch, const EditRequest& request, const NoiseSchedule& schedule,
                              const Providers& providers) {
  request.validate();
  require(providers.state_encoder && providers.noise_predictor, "edit needs a state encoder and a noise predictor");
  require(!patch.x0.empty() && !patch.source.empty(), "edit patch has no source");
  if (request.use_mask)
    require(patch.mask.same_extent(patch.source) && patch.mask.channels() == 1, "edit patch mask missing or mis-sized");
  if (request.use_hed) require(!patch.hed.empty(), "edit patch has no edge map");

  Conditioning cond;
  cond.prompt = request.target_prompt;
  cond.lambda = request.lambda_hed;
  cond.guidance_scale = request.guidance_scale;
  if (request.use_hed) cond.edges = std::make_shared<const Image>(patch.hed);

  Mask state_mask;
  if (request.use_mask) state_mask = max_pool(patch.mask, patch.x0.width(), patch.x0.height());

  std::vector<Image> out;
  for (int k = 0; k < request.num_samples; ++k) {
    auto rng = substream(request.seed, "edit.noise", static_cast<std::uint64_t>(k));
    NoisedPatch noised = noise_patch(patch.x0, request.rho, schedule, rng);
    State y = std::move(noised.x_t);
    for (int i = noised.start_index; i >= 1; --i) {
      y = ddim_step(y, i, schedule, cond, *providers.noise_predictor);
      if (request.use_mask) y = masked_blend(y, noised.marginal.sample(i - 1), state_mask);
    }
    Image decoded = providers.state_encoder->decode(y);
    if (!decoded.same_shape(patch.source)) decoded = resize(decoded, patch.source.width(), patch.source.height());
    if (request.use_mask) decoded = select(patch.mask, decoded, patch.source);
    out.push_back(std::move(decoded));
  }
  return out;
}

Image working_crop(const Image& atlas_rgba, const Rect& bbox, int width, int height) {
  require(bbox.within(atlas_rgba.width(), atlas_rgba.height()) && !bbox.empty(), "bbox out of atlas bounds");
  const Image c = crop(atlas_rgba, bbox);
  Image rgb(c.width(), c.height(), 3);
  for (int y = 0; y < c.height(); ++y)
    for (int x = 0; x < c.width(); ++x)
      for (int k = 0; k < 3; ++k) rgb.at(x, y, k) = c.at(x, y, std::min(k, c.channels() - 1));
  return resize(rgb, width, height);
}

PasteResult paste_patch(const AtlasSet& atlas, Layer layer, const Image& edited, const Rect& bbox) {
  const Image& raster = atlas.layer(layer);
  require(bbox.within(raster.width(), raster.height()) && !bbox.empty(), "bbox out of atlas bounds");
  require(edited.channels() >= 3, "edited patch needs RGB channels");
  const Image base = working_crop(raster, bbox, edited.width(), edited.height());
  Image delta(edited.width(), edited.height(), 3);
  for (int y = 0; y < edited.height(); ++y)
    for (int x = 0; x < edited.width(); ++x)
      for (int c = 0; c < 3; ++c) delta.at(x, y, c) = edited.at(x, y, c) - base.at(x, y, c);
  const Image small = resize(delta, bbox.width, bbox.height);

  PasteResult out{atlas, {layer, Mask(raster.width(), raster.height(), 1)}};
  Image& dst = out.atlas.layer(layer);
  for (int y = 0; y < bbox.height; ++y)
    for (int x = 0; x < bbox.width; ++x)
      for (int c = 0; c < 3; ++c) {
        float& v = dst.at(bbox.x + x, bbox.y + y, c);
        const float nv = static_cast<float>(std::clamp(static_cast<double>(v) + small.at(x, y, c), 0.0, 1.0));
        if (nv != v) {
          v = nv;
          out.touched.mask.at(bbox.x + x, bbox.y + y) = 1;
        }
      }
  return out;
}

EditResult edit_video(const AtlasSet& atlas, const VideoClip& original, const EditRequest& request,
                      const Providers& providers, const PipelineConfig& config) {
  request.validate();
  config.validate();
  atlas.validate();
  require(original.frame_count() == atlas.frames && original.width() == atlas.width &&
              original.height() == atlas.height,
          "original clip does not match the atlas");
  require(providers.segmenter && providers.state_encoder && providers.noise_predictor,
          "edit needs segmenter, state encoder and noise predictor");
  if (request.use_hed) require(providers.edge_detector != nullptr, "edge conditioning needs an edge detector");

  const NoiseSchedule schedule(config.schedule);
  Stopwatch clock;
  EditResult result;
  result.layer = request.layer ? *request.layer : select_layer(request.source_tokens, config.foreground_classes);
  const Image& raster = atlas.layer(result.layer);
  result.blended_atlas = blend_atlas_for_segmentation(raster);
  result.timings["blend"] = clock.lap();

  const int wr = config.working_resolution;
  const LocatedRegion region = locate_region(result.blended_atlas, request.source_tokens, *providers.segmenter,
                                             {wr, config.crop_padding, config.mask_dilation});
  result.timings["locate"] = clock.lap();

  EditPatch& patch = result.patch;
  patch.layer = result.layer;
  patch.bbox = region.bbox;
  patch.mask = region.mask;
  patch.source = working_crop(raster, region.bbox, wr, wr);
  patch.x0 = providers.state_encoder->encode(patch.source);
  if (request.use_hed) {
    patch.hed = providers.edge_detector->edges(working_crop(result.blended_atlas, region.bbox, wr, wr));
    require(patch.hed.same_extent(patch.source), "edge map dims differ from the patch");
  }
  result.timings["prepare"] = clock.lap();

  const std::vector<Image> edited = edit_patch(patch, request, schedule, providers);
  result.timings["diffusion"] = clock.lap();

  for (const Image& e : edited) {
    PasteResult pasted = paste_patch(atlas, result.layer, e, region.bbox);
    EditSample s;
    s.patch = e;
    s.video = composite_edit_layer(original, pasted.atlas, pasted.touched);
    s.atlas = std::move(pasted.atlas);
    s.touched = std::move(pasted.touched);
    result.samples.push_back(std::move(s));
  }
  result.timings["composite"] = clock.lap();
  return result;
}

EditResult edit_video(const VideoClip& video, const CoordinateNetworkConfig& nla_config, std::uint64_t nla_seed,
                      const EditRequest& request, const Providers& providers, const PipelineConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const AtlasSet atlas = train_nla(video, nla_config, nla_seed);
  const double fit = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  EditResult r = edit_video(atlas, video, request, providers, config);
  r.timings["decompose"] = fit;
  return r;
}

}  // namespace atlasedit
