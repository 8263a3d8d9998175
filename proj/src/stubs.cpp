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


#include "atlasedit/stubs.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <limits>

#include "atlasedit/rng.hpp"

namespace atlasedit {

namespace {

ProviderDescriptor stub_descriptor(ProviderKind kind, std::string name) {
  ProviderDescriptor d;
  d.kind = kind;
  d.name = std::move(name);
  d.deterministic = true;
  d.concurrency_safe = true;
  return d;
}

const std::vector<std::pair<std::string, Rgb>>& color_words() {
  static const std::vector<std::pair<std::string, Rgb>> words{
      {"red", {1, 0, 0}},        {"green", {0, 1, 0}},      {"blue", {0, 0, 1}},      {"yellow", {1, 1, 0}},
      {"cyan", {0, 1, 1}},       {"magenta", {1, 0, 1}},    {"white", {1, 1, 1}},     {"black", {0, 0, 0}},
      {"gray", {0.5, 0.5, 0.5}}, {"grey", {0.5, 0.5, 0.5}}, {"orange", {1, 0.5, 0}}, {"purple", {0.5, 0, 0.5}},
  };
  return words;
}

std::vector<std::string> words_of(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    if (std::isalpha(static_cast<unsigned char>(ch))) {
      cur += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    } else if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

double quantize255(double v) { return std::round(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0; }

}  // namespace

std::optional<Rgb> color_from_text(const std::string& text) {
  for (const auto& w : words_of(text))
    for (const auto& [name, rgb] : color_words())
      if (w == name) return rgb;
  return std::nullopt;
}

Image render_text_fixture(const std::string& text, int width, int height) {
  const auto c = color_from_text(text);
  require(c.has_value(), "no colour word in '" + text + "'");
  Image img(width, height, 3);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      for (int k = 0; k < 3; ++k) img.at(x, y, k) = static_cast<float>((*c)[k]);
  return img;
}

// ---------------------------------------------------------------- segmenter

StubSegmenter::StubSegmenter(std::vector<LabelRule> rules, double threshold, int min_area)
    : Segmenter(stub_descriptor(ProviderKind::kSegmenter, "stub-segmenter")),
      rules_(std::move(rules)),
      threshold_(threshold),
      min_area_(min_area) {}

std::vector<Segment> StubSegmenter::do_segment(const Image& image) const {
  const int w = image.width(), h = image.height(), ch = image.channels();
  Mask on(w, h, 1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double dist = 0;
      for (int c = 0; c < ch; ++c) dist = std::max(dist, 1.0 - image.at(x, y, c));
      on.at(x, y) = dist > threshold_ ? 1 : 0;
    }

  std::vector<int> label(static_cast<std::size_t>(w) * h, -1);
  std::vector<Segment> out;
  std::vector<std::pair<int, int>> stack;
  int next_id = 0;
  for (int sy = 0; sy < h; ++sy)
    for (int sx = 0; sx < w; ++sx) {
      if (!on.at(sx, sy) || label[static_cast<std::size_t>(sy) * w + sx] >= 0) continue;
      Mask m(w, h, 1);
      Rgb sum{0, 0, 0};
      int area = 0;
      const int id = next_id++;
      stack.assign(1, {sx, sy});
      label[static_cast<std::size_t>(sy) * w + sx] = id;
      while (!stack.empty()) {
        const auto [x, y] = stack.back();
        stack.pop_back();
        m.at(x, y) = 1;
        ++area;
        for (int c = 0; c < std::min(ch, 3); ++c) sum[c] += image.at(x, y, c);
        constexpr int kDx[4] = {1, -1, 0, 0}, kDy[4] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) {
          const int nx = x + kDx[k], ny = y + kDy[k];
          if (nx < 0 || ny < 0 || nx >= w || ny >= h || !on.at(nx, ny)) continue;
          int& l = label[static_cast<std::size_t>(ny) * w + nx];
          if (l >= 0) continue;
          l = id;
          stack.push_back({nx, ny});
        }
      }
      Segment seg;
      seg.label = "blob";
      seg.score = 1.0;
      seg.mask = std::move(m);
      if (!rules_.empty()) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& r : rules_) {
          double d = 0;
          for (int c = 0; c < 3; ++c) d += std::pow(sum[c] / area - r.color[c], 2);
          if (d < best) {
            best = d;
            seg.label = r.label;
          }
        }
      }
      if (area >= min_area_) out.push_back(std::move(seg));
    }
  return out;
}

// -------------------------------------------------------------------- edges

StubEdgeDetector::StubEdgeDetector() : EdgeDetector(stub_descriptor(ProviderKind::kEdgeDetector, "stub-sobel")) {}

Image StubEdgeDetector::do_edges(const Image& image) const {
  const int w = image.width(), h = image.height(), ch = image.channels();
  std::vector<double> lum(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double s = 0;
      for (int c = 0; c < ch; ++c) s += image.at(x, y, c);
      lum[static_cast<std::size_t>(y) * w + x] = s / ch;
    }
  auto L = [&](int x, int y) {
    x = std::clamp(x, 0, w - 1);
    y = std::clamp(y, 0, h - 1);
    return lum[static_cast<std::size_t>(y) * w + x];
  };
  std::vector<double> mag(lum.size());
  double peak = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double gx = (L(x + 1, y - 1) + 2 * L(x + 1, y) + L(x + 1, y + 1)) -
                        (L(x - 1, y - 1) + 2 * L(x - 1, y) + L(x - 1, y + 1));
      const double gy = (L(x - 1, y + 1) + 2 * L(x, y + 1) + L(x + 1, y + 1)) -
                        (L(x - 1, y - 1) + 2 * L(x, y - 1) + L(x + 1, y - 1));
      const double m = std::hypot(gx, gy);
      mag[static_cast<std::size_t>(y) * w + x] = m;
      peak = std::max(peak, m);
    }
  Image out(w, h, 1);
  if (peak > 0)
    for (std::size_t i = 0; i < mag.size(); ++i)
      out.data()[i] = static_cast<float>(std::clamp(mag[i] / peak, 0.0, 1.0));
  return out;
}

// ----------------------------------------------------------------- embedder

StubEmbedder::StubEmbedder(std::uint64_t seed, int dimension)
    : Embedder(stub_descriptor(ProviderKind::kEmbedder, "stub-embedder")), seed_(seed), dimension_(dimension) {
  require(dimension >= 4, "stub embedder needs at least 4 dimensions");
  auto rng = substream(seed, "embedder.basis");
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd g(dimension, 4);
  for (int j = 0; j < 4; ++j)
    for (int i = 0; i < dimension; ++i) g(i, j) = n(rng);
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(dimension, 4);
  basis_.assign(q.data(), q.data() + q.size());
}

Embedding StubEmbedder::embed_color(const Rgb& color) const {
  const double v[4] = {2 * quantize255(color[0]) - 1, 2 * quantize255(color[1]) - 1, 2 * quantize255(color[2]) - 1, 1.0};
  Embedding e(dimension_, 0.0);
  for (int j = 0; j < 4; ++j)
    for (int i = 0; i < dimension_; ++i) e[i] += basis_[static_cast<std::size_t>(j) * dimension_ + i] * v[j];
  return e;
}

Embedding StubEmbedder::do_embed_image(const Image& image) const {
  require(!image.empty(), "embed_image: empty image");
  Rgb sum{0, 0, 0};
  const int ch = image.channels();
  for (int y = 0; y < image.height(); ++y)
    for (int x = 0; x < image.width(); ++x)
      for (int c = 0; c < 3; ++c) sum[c] += image.at(x, y, ch >= 3 ? c : 0);
  const double n = static_cast<double>(image.pixel_count());
  return embed_color({sum[0] / n, sum[1] / n, sum[2] / n});
}

Embedding StubEmbedder::do_embed_text(const std::string& text) const {
  if (const auto c = color_from_text(text)) return embed_color(*c);
  auto rng = substream(seed_, "embedder.text", fnv1a(text));
  std::normal_distribution<double> n(0.0, 1.0);
  Embedding e(dimension_);
  for (double& v : e) v = n(rng);
  return e;
}

// ---------------------------------------------------------------- captioner

StubCaptioner::StubCaptioner() : Captioner(stub_descriptor(ProviderKind::kCaptioner, "stub-captioner")) {}

std::uint64_t StubCaptioner::frame_hash(const Image& frame) {
  std::string dims = std::to_string(frame.width()) + "x" + std::to_string(frame.height()) + "x" +
                     std::to_string(frame.channels());
  std::uint64_t h = fnv1a(dims);
  return fnv1a({reinterpret_cast<const char*>(frame.data().data()), frame.size() * sizeof(float)}, h);
}

void StubCaptioner::add(const Image& frame, std::string caption) { captions_[frame_hash(frame)] = std::move(caption); }

std::string StubCaptioner::do_caption(const Image& frame) const {
  const auto it = captions_.find(frame_hash(frame));
  return it == captions_.end() ? "unknown scene" : it->second;
}

// --------------------------------------------------------------- predictors

ZeroPredictor::ZeroPredictor() : NoisePredictor(stub_descriptor(ProviderKind::kNoisePredictor, "stub-zero")) {}

State ZeroPredictor::do_predict(const State& y, int, const Conditioning&) const {
  return State(y.width(), y.height(), y.channels(), 0.0);
}

OraclePredictor::OraclePredictor() : NoisePredictor(stub_descriptor(ProviderKind::kNoisePredictor, "stub-oracle")) {}

void OraclePredictor::record(int timestep, State epsilon) { recorded_[timestep] = std::move(epsilon); }

State OraclePredictor::do_predict(const State& y, int timestep, const Conditioning&) const {
  const auto it = recorded_.find(timestep);
  if (it == recorded_.end()) throw ProviderError("stub-oracle", "no noise recorded for timestep " + std::to_string(timestep));
  if (!it->second.same_shape(y)) throw ProviderError("stub-oracle", "recorded noise shape differs from the state");
  return it->second;
}

double gaussian_epsilon(double y, double alpha_bar, double mu, double sigma) noexcept {
  return std::sqrt(1.0 - alpha_bar) * (y - std::sqrt(alpha_bar) * mu) / (alpha_bar * sigma * sigma + 1.0 - alpha_bar);
}

LinearGaussianPredictor::LinearGaussianPredictor(NoiseSchedule schedule, double mu, double sigma)
    : NoisePredictor(stub_descriptor(ProviderKind::kNoisePredictor, "stub-linear-gaussian")),
      schedule_(std::move(schedule)),
      mu_(mu),
      sigma_(sigma) {
  require(sigma > 0, "linear gaussian predictor needs sigma > 0");
}

State LinearGaussianPredictor::do_predict(const State& y, int timestep, const Conditioning&) const {
  const double ab = schedule_.alpha_bar(timestep);
  State out(y.width(), y.height(), y.channels());
  for (std::size_t i = 0; i < y.size(); ++i) out.data()[i] = gaussian_epsilon(y.data()[i], ab, mu_, sigma_);
  return out;
}

StubDiffusionPredictor::StubDiffusionPredictor(NoiseSchedule schedule, double edge_gain)
    : NoisePredictor(stub_descriptor(ProviderKind::kNoisePredictor, "stub-diffusion")),
      schedule_(std::move(schedule)),
      edge_gain_(edge_gain) {}

State StubDiffusionPredictor::do_predict(const State& y, int timestep, const Conditioning& cond) const {
  constexpr double kMuUncond = 0.5, kSigmaUncond = 0.3, kSigmaCond = 0.1;
  const double ab = schedule_.alpha_bar(timestep);
  const int w = y.width(), h = y.height(), ch = y.channels();

  std::optional<Rgb> target;
  if (!cond.prompt.empty()) {
    target = color_from_text(cond.prompt);
    if (!target) {
      auto rng = substream(0, "stub-diffusion.prompt", fnv1a(cond.prompt));
      std::uniform_real_distribution<double> u(0.0, 1.0);
      target = Rgb{u(rng), u(rng), u(rng)};
    }
  }

  Image edges;
  if (cond.edges && !cond.edges->empty()) {
    edges = cond.edges->same_extent(y) ? *cond.edges : resize(*cond.edges, w, h);
  }

  const double g = cond.guidance_scale;
  require(g >= 0.0, "guidance scale must be non-negative");
  const double guided_sigma =
      1.0 / std::sqrt(g / (kSigmaCond * kSigmaCond) - (g - 1.0) / (kSigmaUncond * kSigmaUncond));

  State out(w, h, ch);
  for (int py = 0; py < h; ++py)
    for (int px = 0; px < w; ++px)
      for (int c = 0; c < ch; ++c) {
        double mu = target ? (*target)[std::min(c, 2)] : kMuUncond;
        if (!edges.empty()) mu -= cond.lambda * edge_gain_ * edges.at(px, py, 0);
        out.at(px, py, c) = gaussian_epsilon(y.at(px, py, c), ab, mu, target ? guided_sigma : kSigmaUncond);
      }
  return out;
}

CountingPredictor::CountingPredictor(std::shared_ptr<NoisePredictor> inner)
    : NoisePredictor([&] {
        require(inner != nullptr, "counting predictor needs an inner predictor");
        ProviderDescriptor d = inner->descriptor();
        d.name = "counting(" + d.name + ")";
        return d;
      }()),
      inner_(std::move(inner)) {}

State CountingPredictor::do_predict(const State& y, int timestep, const Conditioning& cond) const {
  ++calls_;
  return inner_->predict(y, timestep, cond);
}

// ------------------------------------------------------------------ encoder

IdentityEncoder::IdentityEncoder() : StateEncoder(stub_descriptor(ProviderKind::kStateEncoder, "identity")) {}

State IdentityEncoder::do_encode(const Image& image) const { return to_state(image); }

Image IdentityEncoder::do_decode(const State& state) const { return to_image(state, true); }

// ----------------------------------------------------------------- features

RandomConvFeatures::RandomConvFeatures(std::uint64_t seed)
    : FeatureExtractor(stub_descriptor(ProviderKind::kFeatureExtractor, "stub-random-conv")) {
  const int widths[4] = {3, 8, 16, 16};
  for (int l = 0; l < 3; ++l) {
    Conv conv;
    conv.in = widths[l];
    conv.out = widths[l + 1];
    auto rng = substream(seed, "features.conv", l);
    std::normal_distribution<double> n(0.0, std::sqrt(2.0 / (9.0 * conv.in)));
    std::normal_distribution<double> b(0.0, 0.1);
    conv.weights.resize(static_cast<std::size_t>(conv.out) * conv.in * 9);
    for (double& v : conv.weights) v = n(rng);
    conv.bias.resize(conv.out);
    for (double& v : conv.bias) v = b(rng);
    layers_.push_back(std::move(conv));
  }
}

std::vector<State> RandomConvFeatures::do_features(const Image& image) const {
  State x(image.width(), image.height(), 3);
  for (int y = 0; y < image.height(); ++y)
    for (int px = 0; px < image.width(); ++px)
      for (int c = 0; c < 3; ++c) x.at(px, y, c) = 2.0 * image.at(px, y, image.channels() >= 3 ? c : 0) - 1.0;

  std::vector<State> out;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Conv& conv = layers_[l];
    if (l > 0 && x.width() >= 2 && x.height() >= 2) {
      State pooled(x.width() / 2, x.height() / 2, x.channels());
      for (int y = 0; y < pooled.height(); ++y)
        for (int px = 0; px < pooled.width(); ++px)
          for (int c = 0; c < x.channels(); ++c)
            pooled.at(px, y, c) = (x.at(2 * px, 2 * y, c) + x.at(2 * px + 1, 2 * y, c) + x.at(2 * px, 2 * y + 1, c) +
                                   x.at(2 * px + 1, 2 * y + 1, c)) /
                                  4.0;
      x = std::move(pooled);
    }
    State y(x.width(), x.height(), conv.out);
    for (int py = 0; py < x.height(); ++py)
      for (int px = 0; px < x.width(); ++px)
        for (int o = 0; o < conv.out; ++o) {
          double s = conv.bias[o];
          for (int i = 0; i < conv.in; ++i)
            for (int ky = 0; ky < 3; ++ky) {
              const int sy = py + ky - 1;
              if (sy < 0 || sy >= x.height()) continue;
              for (int kx = 0; kx < 3; ++kx) {
                const int sx = px + kx - 1;
                if (sx < 0 || sx >= x.width()) continue;
                s += conv.weights[((static_cast<std::size_t>(o) * conv.in + i) * 3 + ky) * 3 + kx] * x.at(sx, sy, i);
              }
            }
          y.at(px, py, o) = std::max(s, 0.0);
        }
    out.push_back(y);
    x = std::move(y);
  }
  return out;
}

Providers make_stub_providers(const StubOptions& options) {
  Providers p;
  p.segmenter = std::make_shared<StubSegmenter>(options.label_rules);
  p.edge_detector = std::make_shared<StubEdgeDetector>();
  p.embedder = std::make_shared<StubEmbedder>(options.seed);
  p.captioner = std::make_shared<StubCaptioner>();
  p.noise_predictor = std::make_shared<StubDiffusionPredictor>(NoiseSchedule(options.schedule), options.edge_gain);
  p.state_encoder = std::make_shared<IdentityEncoder>();
  p.feature_extractor = std::make_shared<RandomConvFeatures>(options.seed);
  return p;
}

}  // namespace atlasedit
