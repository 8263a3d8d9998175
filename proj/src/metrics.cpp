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


#include "atlasedit/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

namespace atlasedit {

void ScoredVideoPair::validate() const {
  require(source.frame_count() >= 1 && source.frame_count() == edited.frame_count(),
          "pair '" + name + "': source and edited frame counts differ");
  for (int t = 0; t < source.frame_count(); ++t)
    require(source.frames[t].same_shape(edited.frames[t]), "pair '" + name + "': frame dims differ");
  if (gt_mask) {
    require(static_cast<int>(gt_mask->size()) == source.frame_count(), "pair '" + name + "': mask count differs");
    for (int t = 0; t < source.frame_count(); ++t)
      require((*gt_mask)[t].same_extent(source.frames[t]), "pair '" + name + "': mask dims differ");
  }
}

double cosine_similarity(const Embedding& a, const Embedding& b) {
  require(a.size() == b.size() && !a.empty(), "embedding dimensions differ");
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  require(na > 0 && nb > 0, "cosine of a zero vector");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

double clip_score(const Embedding& image, const Embedding& text) {
  return std::max(100.0 * cosine_similarity(image, text), 0.0);
}

namespace {

void require_pairs(const std::vector<ScoredVideoPair>& pairs) {
  require(!pairs.empty(), "no video pairs to score");
  for (const auto& p : pairs) require(p.edited.frame_count() >= 1, "pair '" + p.name + "' has no frames");
}

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

double video_frame_accuracy(const std::vector<Image>& frames, const Embedding& target, const Embedding& source,
                            const Embedder& embedder) {
  int hits = 0;
  for (const Image& f : frames) {
    const Embedding e = embedder.embed_image(f);
    if (clip_score(e, target) > clip_score(e, source)) ++hits;
  }
  return 100.0 * hits / static_cast<double>(frames.size());
}

Embedding difference(const Embedding& a, const Embedding& b) {
  Embedding d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return d;
}

bool is_zero(const Embedding& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

}  // namespace

double prompt_consistency(const std::vector<ScoredVideoPair>& pairs, const Embedder& embedder) {
  require_pairs(pairs);
  std::vector<double> per_video;
  for (const auto& p : pairs) {
    const Embedding text = embedder.embed_text(p.target_caption);
    std::vector<double> s;
    for (const Image& f : p.edited.frames) s.push_back(clip_score(embedder.embed_image(f), text));
    per_video.push_back(mean(s));
  }
  return mean(per_video);
}

double frame_accuracy(const std::vector<ScoredVideoPair>& pairs, const Embedder& embedder) {
  require_pairs(pairs);
  std::vector<double> per_video;
  for (const auto& p : pairs) {
    require(p.source_caption != p.target_caption, "pair '" + p.name + "': source and target captions are equal");
    per_video.push_back(video_frame_accuracy(p.edited.frames, embedder.embed_text(p.target_caption),
                                             embedder.embed_text(p.source_caption), embedder));
  }
  return mean(per_video);
}

DirectionalSimilarity directional_similarity(const std::vector<ScoredVideoPair>& pairs, const Embedder& embedder) {
  require_pairs(pairs);
  DirectionalSimilarity out;
  std::vector<double> per_video;
  for (const auto& p : pairs) {
    require(p.source.frame_count() == p.edited.frame_count(), "pair '" + p.name + "': frame counts differ");
    const Embedding dc = difference(embedder.embed_text(p.target_caption), embedder.embed_text(p.source_caption));
    std::vector<double> s;
    for (int t = 0; t < p.edited.frame_count(); ++t) {
      const Embedding di =
          difference(embedder.embed_image(p.edited.frames[t]), embedder.embed_image(p.source.frames[t]));
      if (is_zero(di) || is_zero(dc)) {
        ++out.skipped_frames;
        continue;
      }
      s.push_back(100.0 * cosine_similarity(di, dc));
    }
    out.scored_frames += static_cast<int>(s.size());
    if (!s.empty()) per_video.push_back(mean(s));
  }
  if (!per_video.empty()) out.score = mean(per_video);
  return out;
}

double frame_consistency(const VideoClip& video, const Embedder& embedder) {
  require(video.frame_count() >= 2, "frame consistency needs at least 2 frames");
  std::vector<double> s;
  Embedding prev = embedder.embed_image(video.frames[0]);
  for (int t = 1; t < video.frame_count(); ++t) {
    Embedding cur = embedder.embed_image(video.frames[t]);
    s.push_back(clip_score(prev, cur));
    prev = std::move(cur);
  }
  return mean(s);
}

std::map<std::string, double> aggregate_score(const ScoreTable& table,
                                              const std::map<std::string, Orientation>& orientation) {
  require(!table.empty(), "aggregate over an empty table");
  require(orientation.size() == 3, "an aggregate aspect has exactly 3 metrics");
  std::map<std::string, double> best;
  for (const auto& [metric, dir] : orientation) {
    double b = dir == Orientation::kMaximize ? -std::numeric_limits<double>::infinity()
                                              : std::numeric_limits<double>::infinity();
    for (const auto& [baseline, values] : table) {
      const auto it = values.find(metric);
      require(it != values.end(), "baseline '" + baseline + "' lacks metric '" + metric + "'");
      require(it->second > 0 && std::isfinite(it->second),
              "aggregate needs positive finite values ('" + baseline + "', '" + metric + "')");
      b = dir == Orientation::kMaximize ? std::max(b, it->second) : std::min(b, it->second);
    }
    best[metric] = b;
  }
  std::map<std::string, double> out;
  for (const auto& [baseline, values] : table) {
    double sum = 0;
    for (const auto& [metric, dir] : orientation) {
      const double v = values.at(metric);
      sum += dir == Orientation::kMaximize ? best[metric] / v : v / best[metric];
    }
    out[baseline] = sum;
  }
  return out;
}

double psnr(const Image& a, const Image& b, double peak) {
  require(a.same_shape(b), "psnr: shapes differ");
  require(peak > 0, "psnr: peak must be positive");
  require(!a.empty(), "psnr: empty image");
  double se = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a.data()[i]) - b.data()[i];
    se += d * d;
  }
  if (se == 0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / (se / a.size()));
}

double psnr(const VideoClip& a, const VideoClip& b, double peak) {
  require(a.frame_count() == b.frame_count() && a.frame_count() > 0, "psnr: frame counts differ");
  require(peak > 0, "psnr: peak must be positive");
  double se = 0;
  std::size_t n = 0;
  for (int t = 0; t < a.frame_count(); ++t) {
    const Image& fa = a.frames[t];
    const Image& fb = b.frames[t];
    require(fa.same_shape(fb), "psnr: frame shapes differ");
    for (std::size_t i = 0; i < fa.size(); ++i) {
      const double d = static_cast<double>(fa.data()[i]) - fb.data()[i];
      se += d * d;
    }
    n += fa.size();
  }
  if (se == 0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / (se / n));
}

namespace {

struct Plane {
  int w = 0, h = 0;
  std::vector<double> v;
  Plane(int w_, int h_) : w(w_), h(h_), v(static_cast<std::size_t>(w_) * h_, 0.0) {}
  double& at(int x, int y) { return v[static_cast<std::size_t>(y) * w + x]; }
  double get(int x, int y) const {
    return (x < 0 || y < 0 || x >= w || y >= h) ? 0.0 : v[static_cast<std::size_t>(y) * w + x];
  }
};

std::vector<Plane> to_yiq(const Image& img) {
  const int w = img.width(), h = img.height();
  if (img.channels() == 1) {
    Plane p(w, h);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) p.at(x, y) = 255.0 * img.at(x, y);
    return {p};
  }
  static constexpr double kYiq[3][3] = {
      {0.299, 0.587, 0.114}, {0.5959, -0.2746, -0.3213}, {0.2115, -0.5227, 0.3112}};
  std::vector<Plane> out(3, Plane(w, h));
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double r = 255.0 * img.at(x, y, 0), g = 255.0 * img.at(x, y, 1), b = 255.0 * img.at(x, y, 2);
      for (int k = 0; k < 3; ++k) out[k].at(x, y) = kYiq[k][0] * r + kYiq[k][1] * g + kYiq[k][2] * b;
    }
  return out;
}

// 2x2 mean, stride 2. Odd inputs are zero-padded bottom and right on both axes.
Plane subsample(const Plane& p, int pad) {
  Plane out((p.w + pad) / 2, (p.h + pad) / 2);
  for (int y = 0; y < out.h; ++y)
    for (int x = 0; x < out.w; ++x)
      out.at(x, y) =
          (p.get(2 * x, 2 * y) + p.get(2 * x + 1, 2 * y) + p.get(2 * x, 2 * y + 1) + p.get(2 * x + 1, 2 * y + 1)) / 4.0;
  return out;
}

// Correlation with the k x k Haar kernel (1/k, lower half negated), zero
// padded k/2-1 before and k/2 after. `vertical` selects the transposed kernel.
Plane haar(const Plane& p, int k, bool vertical) {
  const int lead = k / 2 - 1;
  Plane out(p.w, p.h);
  for (int y = 0; y < p.h; ++y)
    for (int x = 0; x < p.w; ++x) {
      double s = 0;
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
          const int split = vertical ? j : i;
          const double kv = (split < k / 2 ? 1.0 : -1.0) / k;
          s += kv * p.get(x - lead + j, y - lead + i);
        }
      out.at(x, y) = s;
    }
  return out;
}

// |2x2 mean, stride 1|, zero padded one texel bottom and right.
Plane local_mean_abs(const Plane& p) {
  Plane out(p.w, p.h);
  for (int y = 0; y < p.h; ++y)
    for (int x = 0; x < p.w; ++x)
      out.at(x, y) = std::abs((p.get(x, y) + p.get(x + 1, y) + p.get(x, y + 1) + p.get(x + 1, y + 1)) / 4.0);
  return out;
}

double similarity(double a, double b, double c) { return (2 * a * b + c) / (a * a + b * b + c); }

}  // namespace

double haarpsi(const Image& a, const Image& b) {
  require(a.same_shape(b), "haarpsi: shapes differ");
  require(a.channels() == 1 || a.channels() == 3, "haarpsi: expects 1 or 3 channels");
  require(a.width() >= 8 && a.height() >= 8, "haarpsi: images must be at least 8x8");
  constexpr double kC = 30.0, kAlpha = 4.2;

  auto xa = to_yiq(a), xb = to_yiq(b);
  const int pad = std::max(a.height() % 2, a.width() % 2);
  for (auto& p : xa) p = subsample(p, pad);
  for (auto& p : xb) p = subsample(p, pad);

  // coeff[scale][orientation]
  Plane dummy(0, 0);
  std::vector<std::vector<Plane>> ca(3, std::vector<Plane>(2, dummy)), cb = ca;
  for (int s = 0; s < 3; ++s)
    for (int o = 0; o < 2; ++o) {
      ca[s][o] = haar(xa[0], 2 << s, o == 1);
      cb[s][o] = haar(xb[0], 2 << s, o == 1);
    }

  const bool color = a.channels() == 3;
  Plane ia(0, 0), ib(0, 0), qa(0, 0), qb(0, 0);
  if (color) {
    ia = local_mean_abs(xa[1]);
    ib = local_mean_abs(xb[1]);
    qa = local_mean_abs(xa[2]);
    qb = local_mean_abs(xb[2]);
  }

  const int w = xa[0].w, h = xa[0].h;
  auto sigmoid = [](double z) { return 1.0 / (1.0 + std::exp(-z)); };
  double num = 0, den = 0, num_flat = 0, den_flat = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double wo[2];
      for (int o = 0; o < 2; ++o) {
        wo[o] = std::max(std::abs(ca[2][o].get(x, y)), std::abs(cb[2][o].get(x, y)));
        double sim = 0;
        for (int s = 0; s < 2; ++s) sim += similarity(std::abs(ca[s][o].get(x, y)), std::abs(cb[s][o].get(x, y)), kC);
        num += sigmoid(kAlpha * sim / 2) * wo[o];
        den += wo[o];
        num_flat += sigmoid(kAlpha * sim / 2);
        den_flat += 1;
      }
      if (color) {
        const double wc = (wo[0] + wo[1]) / 2;
        const double sim = (similarity(ia.get(x, y), ib.get(x, y), kC) + similarity(qa.get(x, y), qb.get(x, y), kC)) / 2;
        num += sigmoid(kAlpha * sim) * wc;
        den += wc;
        num_flat += sigmoid(kAlpha * sim);
        den_flat += 1;
      }
    }
  // Without any coarse-scale structure the weighting map vanishes; pool uniformly instead.
  if (den == 0) {
    num = num_flat;
    den = den_flat;
  }
  constexpr double kEps = std::numeric_limits<double>::epsilon();
  const double score = std::min((num + kEps) / (den + kEps), 1.0 - kEps);
  const double logit = std::log(score / (1 - score)) / kAlpha;
  return logit * logit;
}

double lpips(const Image& a, const Image& b, const FeatureExtractor& features) {
  require(a.same_shape(b), "lpips: shapes differ");
  if (a == b) return 0.0;
  const auto fa = features.features(a);
  const auto fb = features.features(b);
  require(fa.size() == fb.size() && !fa.empty(), "lpips: feature stacks differ");
  double total = 0;
  for (std::size_t l = 0; l < fa.size(); ++l) {
    require(fa[l].same_shape(fb[l]), "lpips: feature shapes differ");
    const int w = fa[l].width(), h = fa[l].height(), c = fa[l].channels();
    double layer = 0;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        double na = 0, nb = 0;
        for (int k = 0; k < c; ++k) {
          na += fa[l].at(x, y, k) * fa[l].at(x, y, k);
          nb += fb[l].at(x, y, k) * fb[l].at(x, y, k);
        }
        na = std::sqrt(na) + 1e-10;
        nb = std::sqrt(nb) + 1e-10;
        for (int k = 0; k < c; ++k) {
          const double d = fa[l].at(x, y, k) / na - fb[l].at(x, y, k) / nb;
          layer += d * d;
        }
      }
    total += layer / (static_cast<double>(w) * h);
  }
  return total;
}

MaskedMetrics masked_metrics(const ScoredVideoPair& pair, const Embedder& embedder, const FeatureExtractor& features) {
  if (!pair.gt_mask) throw InvalidArgument("pair '" + pair.name + "': masked metrics need a ground-truth mask");
  pair.validate();
  require(pair.source_caption != pair.target_caption, "pair '" + pair.name + "': source and target captions are equal");
  MaskedMetrics out;
  std::vector<Image> crops;
  std::vector<double> outer;
  for (int t = 0; t < pair.edited.frame_count(); ++t) {
    const Mask& m = (*pair.gt_mask)[t];
    const Rect box = bounding_box(m);
    if (!box.empty()) crops.push_back(crop(pair.edited.frames[t], box));
    const Image gray(m.width(), m.height(), pair.edited.frames[t].channels(), 0.5f);
    outer.push_back(
        lpips(select(m, gray, pair.source.frames[t]), select(m, gray, pair.edited.frames[t]), features));
  }
  if (crops.empty()) throw DomainError("pair '" + pair.name + "': ground-truth mask is empty in every frame");
  out.local_a_frame = video_frame_accuracy(crops, embedder.embed_text(pair.target_caption),
                                           embedder.embed_text(pair.source_caption), embedder);
  out.o_lpips = mean(outer);
  return out;
}

const std::map<std::string, Orientation>& semantic_aspect() {
  static const std::map<std::string, Orientation> m{
      {"C_Prompt", Orientation::kMaximize}, {"A_Frame", Orientation::kMaximize}, {"S_Dir", Orientation::kMaximize}};
  return m;
}

const std::map<std::string, Orientation>& similarity_aspect() {
  static const std::map<std::string, Orientation> m{
      {"LPIPS", Orientation::kMinimize}, {"HaarPSI", Orientation::kMaximize}, {"PSNR", Orientation::kMaximize}};
  return m;
}

MetricsReport evaluate_pairs(const std::vector<ScoredVideoPair>& pairs, const Providers& providers,
                             const EvaluateOptions& options) {
  require(providers.embedder && providers.feature_extractor, "evaluation needs an embedder and a feature extractor");
  const auto start = std::chrono::steady_clock::now();
  MetricsReport report;
  report.psnr_peak = options.psnr_peak;
  const Embedder& emb = *providers.embedder;
  const FeatureExtractor& feat = *providers.feature_extractor;

  for (const auto& pair : pairs) {
    VideoMetrics row;
    row.name = pair.name;
    try {
      pair.validate();
      const std::vector<ScoredVideoPair> one{pair};
      row.values["C_Prompt"] = prompt_consistency(one, emb);
      row.values["A_Frame"] = frame_accuracy(one, emb);
      const auto sdir = directional_similarity(one, emb);
      report.s_dir_skipped_frames += sdir.skipped_frames;
      if (sdir.score) row.values["S_Dir"] = *sdir.score;
      if (pair.edited.frame_count() >= 2) row.values["C_Frame"] = frame_consistency(pair.edited, emb);
      double lp = 0, hp = 0;
      for (int t = 0; t < pair.edited.frame_count(); ++t) {
        lp += lpips(pair.source.frames[t], pair.edited.frames[t], feat);
        hp += haarpsi(pair.source.frames[t], pair.edited.frames[t]);
      }
      row.values["LPIPS"] = lp / pair.edited.frame_count();
      row.values["HaarPSI"] = hp / pair.edited.frame_count();
      row.values["PSNR"] = psnr(pair.source, pair.edited, options.psnr_peak);
      if (options.masked) {
        const auto mm = masked_metrics(pair, emb, feat);
        row.values["local_A_Frame"] = mm.local_a_frame;
        row.values["O_LPIPS"] = mm.o_lpips;
      }
    } catch (const Error& e) {
      row.values.clear();
      row.error = e.what();
    }
    report.videos.push_back(std::move(row));
  }

  std::map<std::string, std::vector<double>> columns;
  for (const auto& row : report.videos)
    for (const auto& [k, v] : row.values)
      if (std::isfinite(v)) columns[k].push_back(v);
  for (const auto& [k, vals] : columns) {
    MetricSummary s;
    s.count = static_cast<int>(vals.size());
    s.mean = mean(vals);
    double var = 0;
    for (double v : vals) var += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(var / vals.size());
    report.corpus[k] = s;
  }
  std::map<std::string, std::map<std::string, std::vector<double>>> by_method;
  for (std::size_t i = 0; i < pairs.size(); ++i)
    for (const auto& [k, v] : report.videos[i].values)
      if (std::isfinite(v)) by_method[pairs[i].method][k].push_back(v);
  for (const auto& [method, cols] : by_method)
    for (const auto& [k, vals] : cols) report.method_means[method][k] = mean(vals);
  auto aggregate = [&](const std::map<std::string, Orientation>& aspect, std::map<std::string, double>& out) {
    ScoreTable table;
    for (const auto& [method, means] : report.method_means) {
      bool complete = true;
      for (const auto& [k, dir] : aspect) {
        const auto it = means.find(k);
        complete = complete && it != means.end() && it->second > 0;
      }
      if (complete)
        for (const auto& [k, dir] : aspect) table[method][k] = means.at(k);
    }
    if (!table.empty()) out = aggregate_score(table, aspect);
  };
  aggregate(semantic_aspect(), report.aggregate_semantic);
  aggregate(similarity_aspect(), report.aggregate_similarity);
  report.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace atlasedit
