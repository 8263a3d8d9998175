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

#include <atomic>
#include <map>
#include <optional>
#include <unordered_map>

#include "atlasedit/atlas.hpp"
#include "atlasedit/providers.hpp"
#include "atlasedit/schedule.hpp"

namespace atlasedit {

/// Colour named by the first colour word in `text`, if any.
std::optional<Rgb> color_from_text(const std::string& text);

/// Solid image of the colour named in `text`; the stub embedder maps it to
/// the same vector as the text itself.
Image render_text_fixture(const std::string& text, int width = 8, int height = 8);

struct LabelRule {
  std::string label;
  Rgb color;
};

/// Connected components (4-neighbour) of non-white texels. Each component
/// takes the label of the nearest rule colour, or "blob" without rules.
class StubSegmenter final : public Segmenter {
 public:
  explicit StubSegmenter(std::vector<LabelRule> rules = {}, double threshold = 0.1, int min_area = 1);

 protected:
  std::vector<Segment> do_segment(const Image& image) const override;

 private:
  std::vector<LabelRule> rules_;
  double threshold_;
  int min_area_;
};

/// Sobel gradient magnitude of the channel mean, divided by its maximum.
class StubEdgeDetector final : public EdgeDetector {
 public:
  StubEdgeDetector();

 protected:
  Image do_edges(const Image& image) const override;
};

/// Embeds the mean colour c (quantized to 1/255) as P [2c-1, 1] for a seeded
/// matrix P with orthonormal columns; text with a colour word maps to that
/// colour, other text to a hashed random direction.
class StubEmbedder final : public Embedder {
 public:
  explicit StubEmbedder(std::uint64_t seed = 0, int dimension = 64);
  int dimension() const override { return dimension_; }
  Embedding embed_color(const Rgb& color) const;

 protected:
  Embedding do_embed_image(const Image& image) const override;
  Embedding do_embed_text(const std::string& text) const override;

 private:
  std::uint64_t seed_;
  int dimension_;
  std::vector<double> basis_;  // dimension x 4, column major
};

class StubCaptioner final : public Captioner {
 public:
  StubCaptioner();
  void add(const Image& frame, std::string caption);
  static std::uint64_t frame_hash(const Image& frame);

 protected:
  std::string do_caption(const Image& frame) const override;

 private:
  std::unordered_map<std::uint64_t, std::string> captions_;
};

class ZeroPredictor final : public NoisePredictor {
 public:
  ZeroPredictor();

 protected:
  State do_predict(const State& y, int timestep, const Conditioning& cond) const override;
};

/// Plays back recorded noise per timestep.
class OraclePredictor final : public NoisePredictor {
 public:
  OraclePredictor();
  void record(int timestep, State epsilon);

 protected:
  State do_predict(const State& y, int timestep, const Conditioning& cond) const override;

 private:
  std::map<int, State> recorded_;
};

/// Optimal noise estimate E[eps | y_t] when every state element is drawn
/// independently from N(mu, sigma^2).
double gaussian_epsilon(double y, double alpha_bar, double mu, double sigma) noexcept;

/// Exact denoiser for N(mu, sigma^2) data; ignores conditioning.
class LinearGaussianPredictor final : public NoisePredictor {
 public:
  LinearGaussianPredictor(NoiseSchedule schedule, double mu, double sigma);

 protected:
  State do_predict(const State& y, int timestep, const Conditioning& cond) const override;

 private:
  NoiseSchedule schedule_;
  double mu_;
  double sigma_;
};

/// Default stub diffusion model, an exact per-pixel Gaussian denoiser.
/// Without a prompt the data model is N(0.5, 0.3^2) per channel. With a
/// prompt it is the guidance tilt N_c^g / N_u^(g-1) of a conditional
/// N(colour, 0.1^2) and an unconditional N(colour, 0.3^2), i.e.
/// N(colour, 1 / (g / 0.1^2 - (g - 1) / 0.3^2)). The edge map darkens the
/// mean by lambda * edge_gain * edge.
class StubDiffusionPredictor final : public NoisePredictor {
 public:
  explicit StubDiffusionPredictor(NoiseSchedule schedule, double edge_gain = 0.2);

 protected:
  State do_predict(const State& y, int timestep, const Conditioning& cond) const override;

 private:
  NoiseSchedule schedule_;
  double edge_gain_;
};

class CountingPredictor final : public NoisePredictor {
 public:
  explicit CountingPredictor(std::shared_ptr<NoisePredictor> inner);
  long calls() const noexcept { return calls_.load(); }
  void reset() noexcept { calls_ = 0; }

 protected:
  State do_predict(const State& y, int timestep, const Conditioning& cond) const override;

 private:
  std::shared_ptr<NoisePredictor> inner_;
  mutable std::atomic<long> calls_{0};
};

class IdentityEncoder final : public StateEncoder {
 public:
  IdentityEncoder();
  int scale() const override { return 1; }
  double tolerance() const override { return 0.0; }

 protected:
  State do_encode(const Image& image) const override;
  Image do_decode(const State& state) const override;
};

/// Seeded three-stage random convolution stack (3x3 kernels, ReLU, 2x2 mean pooling).
class RandomConvFeatures final : public FeatureExtractor {
 public:
  explicit RandomConvFeatures(std::uint64_t seed = 0);

 protected:
  std::vector<State> do_features(const Image& image) const override;

 private:
  struct Conv {
    int in = 0, out = 0;
    std::vector<double> weights;  // out x in x 3 x 3
    std::vector<double> bias;
  };
  std::vector<Conv> layers_;
};

struct StubOptions {
  std::uint64_t seed = 0;
  ScheduleConfig schedule;
  std::vector<LabelRule> label_rules;
  double edge_gain = 0.2;
};

Providers make_stub_providers(const StubOptions& options = {});

}  // namespace atlasedit
