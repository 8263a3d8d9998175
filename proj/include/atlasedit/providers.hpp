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

#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "atlasedit/raster.hpp"

namespace atlasedit {

enum class ProviderKind {
  kSegmenter,
  kEdgeDetector,
  kEmbedder,
  kCaptioner,
  kNoisePredictor,
  kStateEncoder,
  kFeatureExtractor,
};

std::string to_string(ProviderKind kind);
ProviderKind parse_provider_kind(const std::string& name);

struct ProviderDescriptor {
  ProviderKind kind = ProviderKind::kSegmenter;
  std::string name;
  bool deterministic = true;
  bool concurrency_safe = true;
  std::optional<std::string> endpoint;  // set for remote providers

  void validate() const;
};

/// Base for every model provider. Public entry points funnel through
/// guarded(), which serializes calls when the descriptor says the provider
/// does not tolerate concurrency.
class Provider {
 public:
  explicit Provider(ProviderDescriptor descriptor);
  virtual ~Provider() = default;
  Provider(const Provider&) = delete;
  Provider& operator=(const Provider&) = delete;

  const ProviderDescriptor& descriptor() const noexcept { return descriptor_; }

 protected:
  template <typename F>
  auto guarded(F&& f) const {
    if (descriptor_.concurrency_safe) return f();
    std::lock_guard lock(mutex_);
    return f();
  }

 private:
  ProviderDescriptor descriptor_;
  mutable std::mutex mutex_;
};

struct Segment {
  std::string label;
  double score = 1.0;
  Mask mask;
};

class Segmenter : public Provider {
 public:
  using Provider::Provider;
  std::vector<Segment> segment(const Image& image) const {
    return guarded([&] { return do_segment(image); });
  }

 protected:
  virtual std::vector<Segment> do_segment(const Image& image) const = 0;
};

class EdgeDetector : public Provider {
 public:
  using Provider::Provider;
  /// Single-channel edge strength in [0,1], same extent as the input.
  Image edges(const Image& image) const {
    return guarded([&] { return do_edges(image); });
  }

 protected:
  virtual Image do_edges(const Image& image) const = 0;
};

using Embedding = std::vector<double>;

class Embedder : public Provider {
 public:
  using Provider::Provider;
  Embedding embed_image(const Image& image) const {
    return guarded([&] { return do_embed_image(image); });
  }
  Embedding embed_text(const std::string& text) const {
    return guarded([&] { return do_embed_text(text); });
  }
  virtual int dimension() const = 0;

 protected:
  virtual Embedding do_embed_image(const Image& image) const = 0;
  virtual Embedding do_embed_text(const std::string& text) const = 0;
};

class Captioner : public Provider {
 public:
  using Provider::Provider;
  std::string caption(const Image& frame) const {
    return guarded([&] { return do_caption(frame); });
  }

 protected:
  virtual std::string do_caption(const Image& frame) const = 0;
};

/// Prompt and edge conditioning handed to the noise predictor. A null
/// `edges` is the null edge conditioning; an empty prompt is unconditional.
struct Conditioning {
  std::string prompt;
  std::shared_ptr<const Image> edges;
  double lambda = 1.0;
  double guidance_scale = 7.5;
};

class NoisePredictor : public Provider {
 public:
  using Provider::Provider;
  /// Noise estimate for state y at training timestep t; same shape as y.
  State predict(const State& y, int timestep, const Conditioning& cond) const {
    return guarded([&] { return do_predict(y, timestep, cond); });
  }

 protected:
  virtual State do_predict(const State& y, int timestep, const Conditioning& cond) const = 0;
};

class StateEncoder : public Provider {
 public:
  using Provider::Provider;
  State encode(const Image& image) const {
    return guarded([&] { return do_encode(image); });
  }
  Image decode(const State& state) const {
    return guarded([&] { return do_decode(state); });
  }
  /// Spatial downsampling factor image -> state.
  virtual int scale() const = 0;
  /// Max per-value error of decode(encode(x)).
  virtual double tolerance() const = 0;

 protected:
  virtual State do_encode(const Image& image) const = 0;
  virtual Image do_decode(const State& state) const = 0;
};

/// Deep feature maps backing the perceptual distance.
class FeatureExtractor : public Provider {
 public:
  using Provider::Provider;
  std::vector<State> features(const Image& image) const {
    return guarded([&] { return do_features(image); });
  }

 protected:
  virtual std::vector<State> do_features(const Image& image) const = 0;
};

struct Providers {
  std::shared_ptr<Segmenter> segmenter;
  std::shared_ptr<EdgeDetector> edge_detector;
  std::shared_ptr<Embedder> embedder;
  std::shared_ptr<Captioner> captioner;
  std::shared_ptr<NoisePredictor> noise_predictor;
  std::shared_ptr<StateEncoder> state_encoder;
  std::shared_ptr<FeatureExtractor> feature_extractor;

  std::vector<ProviderDescriptor> descriptors() const;
};

}  // namespace atlasedit
