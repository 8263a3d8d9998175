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

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "atlasedit/providers.hpp"
#include "atlasedit/video.hpp"

namespace atlasedit {

struct ScoredVideoPair {
  std::string name;
  std::string method = "default";
  VideoClip source;
  VideoClip edited;
  std::string source_caption;
  std::string target_caption;
  std::optional<std::vector<Mask>> gt_mask;

  void validate() const;
};

double cosine_similarity(const Embedding& a, const Embedding& b);
/// max(100 cos, 0). Throws on zero or mismatched vectors.
double clip_score(const Embedding& image, const Embedding& text);

double prompt_consistency(const std::vector<ScoredVideoPair>& pairs, const Embedder& embedder);
double frame_accuracy(const std::vector<ScoredVideoPair>& pairs, const Embedder& embedder);

struct DirectionalSimilarity {
  std::optional<double> score;  // nullopt when every frame was skipped
  int scored_frames = 0;
  int skipped_frames = 0;
};
DirectionalSimilarity directional_similarity(const std::vector<ScoredVideoPair>& pairs, const Embedder& embedder);

double frame_consistency(const VideoClip& video, const Embedder& embedder);

enum class Orientation { kMaximize, kMinimize };
using ScoreTable = std::map<std::string, std::map<std::string, double>>;
std::map<std::string, double> aggregate_score(const ScoreTable& table,
                                              const std::map<std::string, Orientation>& orientation);

/// +infinity for identical inputs.
double psnr(const Image& a, const Image& b, double peak = 1.0);
/// Pooled MSE over every frame.
double psnr(const VideoClip& a, const VideoClip& b, double peak = 1.0);

/// HaarPSI on RGB or single-channel images in [0,1]. Both dims must be >= 8.
double haarpsi(const Image& a, const Image& b);

double lpips(const Image& a, const Image& b, const FeatureExtractor& features);

struct MaskedMetrics {
  double local_a_frame = 0.0;
  double o_lpips = 0.0;
};
MaskedMetrics masked_metrics(const ScoredVideoPair& pair, const Embedder& embedder, const FeatureExtractor& features);

struct MetricSummary {
  double mean = 0.0;
  double stddev = 0.0;
  int count = 0;
};

struct VideoMetrics {
  std::string name;
  std::map<std::string, double> values;
  std::optional<std::string> error;
};

struct MetricsReport {
  std::vector<VideoMetrics> videos;
  std::map<std::string, MetricSummary> corpus;
  int s_dir_skipped_frames = 0;
  double psnr_peak = 1.0;
  /// Per-method corpus means, the input of the aggregate scores.
  std::map<std::string, std::map<std::string, double>> method_means;
  std::map<std::string, double> aggregate_semantic;
  std::map<std::string, double> aggregate_similarity;
  double wall_clock_seconds = 0.0;
};

struct EvaluateOptions {
  bool masked = false;
  double psnr_peak = 1.0;
};

/// Scores every pair. A pair that fails validation or a masked-metric
/// precondition gets an error entry instead of aborting the corpus.
MetricsReport evaluate_pairs(const std::vector<ScoredVideoPair>& pairs, const Providers& providers,
                             const EvaluateOptions& options = {});

/// Metric names and orientations of the two aggregate aspects.
const std::map<std::string, Orientation>& semantic_aspect();
const std::map<std::string, Orientation>& similarity_aspect();

}  // namespace atlasedit
