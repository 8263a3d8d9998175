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


#include "atlasedit/nla.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "atlasedit/metrics.hpp"
#include "atlasedit/mlp.hpp"

namespace atlasedit {

UVCoord identity_uv(int x, int y, int width, int height) noexcept {
  return {2.0 * x / (width - 1) - 1.0, 2.0 * y / (height - 1) - 1.0};
}

namespace {

bool is_constant(const VideoClip& video) {
  const auto& ref = video.frames.front();
  for (const Image& f : video.frames)
    for (int y = 0; y < f.height(); ++y)
      for (int x = 0; x < f.width(); ++x)
        for (int c = 0; c < 3; ++c)
          if (f.at(x, y, c) != ref.at(0, 0, c)) return false;
  return true;
}

void fill_identity_tables(AtlasSet& atlas) {
  const std::size_t n = static_cast<std::size_t>(atlas.width) * atlas.height * atlas.frames;
  atlas.uv_fg.resize(2 * n);
  atlas.uv_bg.resize(2 * n);
  atlas.alpha.assign(n, 0.0f);
  for (int t = 0; t < atlas.frames; ++t)
    for (int y = 0; y < atlas.height; ++y)
      for (int x = 0; x < atlas.width; ++x) {
        const UVCoord uv = identity_uv(x, y, atlas.width, atlas.height);
        const std::size_t i = 2 * atlas.pixel_index(x, y, t);
        atlas.uv_fg[i] = atlas.uv_bg[i] = static_cast<float>(uv.u);
        atlas.uv_fg[i + 1] = atlas.uv_bg[i + 1] = static_cast<float>(uv.v);
      }
}

AtlasSet fit_constant(const VideoClip& video, AtlasSet atlas) {
  const int s = atlas.atlas_size;
  atlas.fg_rgba = Image(s, s, 4);
  atlas.bg_rgba = Image(s, s, 4);
  for (int y = 0; y < s; ++y)
    for (int x = 0; x < s; ++x) {
      for (int c = 0; c < 3; ++c)
        atlas.fg_rgba.at(x, y, c) = atlas.bg_rgba.at(x, y, c) = video.frames[0].at(0, 0, c);
      atlas.bg_rgba.at(x, y, 3) = 1.0f;
    }
  fill_identity_tables(atlas);
  atlas.report.trivial = true;
  atlas.report.converged = true;
  atlas.report.psnr = std::numeric_limits<double>::infinity();
  return atlas;
}

// Per-pixel temporal median; pixels far from it are initially foreground.
struct Bootstrap {
  Image median;
  std::vector<std::uint8_t> foreground;  // F x H x W
  std::array<float, 3> foreground_mean{0.5f, 0.5f, 0.5f};
};

Bootstrap bootstrap(const VideoClip& video, float threshold) {
  const int w = video.width(), h = video.height(), f = video.frame_count();
  Bootstrap b;
  b.median = Image(w, h, 3);
  std::vector<float> samples(f);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) {
        for (int t = 0; t < f; ++t) samples[t] = video.frames[t].at(x, y, c);
        std::nth_element(samples.begin(), samples.begin() + f / 2, samples.end());
        b.median.at(x, y, c) = samples[f / 2];
      }
  b.foreground.assign(static_cast<std::size_t>(w) * h * f, 0);
  std::array<double, 3> sum{};
  std::size_t count = 0;
  for (int t = 0; t < f; ++t)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        float dev = 0;
        for (int c = 0; c < 3; ++c) dev = std::max(dev, std::abs(video.frames[t].at(x, y, c) - b.median.at(x, y, c)));
        if (dev > threshold) {
          b.foreground[(static_cast<std::size_t>(t) * h + y) * w + x] = 1;
          for (int c = 0; c < 3; ++c) sum[c] += video.frames[t].at(x, y, c);
          ++count;
        }
      }
  if (count)
    for (int c = 0; c < 3; ++c) b.foreground_mean[c] = static_cast<float>(sum[c] / count);
  return b;
}

struct Networks {
  Mlp alpha, fg, bg;
};

// Normalized (x, y, t) per pixel index.
void pixel_coords(std::size_t idx, int w, int h, int f, float* out) {
  const int x = static_cast<int>(idx % w);
  const int y = static_cast<int>((idx / w) % h);
  const int t = static_cast<int>(idx / (static_cast<std::size_t>(w) * h));
  out[0] = 2.0f * x / (w - 1) - 1.0f;
  out[1] = 2.0f * y / (h - 1) - 1.0f;
  out[2] = 2.0f * t / (f - 1) - 1.0f;
}

float sigmoid(float z) { return 1.0f / (1.0f + std::exp(-z)); }

float opacity(float z, float margin) { return std::clamp((1.0f + 2.0f * margin) * sigmoid(z) - margin, 0.0f, 1.0f); }

Image rasterize(const TexelGrid& grid, int size, float alpha_fill) {
  Image out(size, size, 4);
  float rgb[3];
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      grid.sample(static_cast<float>(uv_coordinate(x, size)), static_cast<float>(uv_coordinate(y, size)), rgb);
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = std::clamp(rgb[c], 0.0f, 1.0f);
      out.at(x, y, 3) = alpha_fill;
    }
  return out;
}

}  // namespace

AtlasSet train_nla(const VideoClip& video, const CoordinateNetworkConfig& config, std::uint64_t seed,
                   const std::function<void(const TrainProgress&)>& progress) {
  video.validate();
  config.validate();
  const int w = video.width(), h = video.height(), f = video.frame_count();

  AtlasSet atlas;
  atlas.atlas_size = config.atlas_size;
  atlas.width = w;
  atlas.height = h;
  atlas.frames = f;
  atlas.config = config;
  atlas.seed = seed;
  if (is_constant(video)) return fit_constant(video, std::move(atlas));

  const int grid = config.grid_resolution > 0 ? config.grid_resolution : std::max(w, h);
  require(grid >= 2, "grid resolution must be at least 2");
  std::mt19937_64 rng(seed);

  const int enc_alpha = encoded_width(3, config.positional_encoding_bands);
  const int enc_map = encoded_width(3, config.mapping_encoding_bands);
  Networks nets{Mlp(enc_alpha, config.hidden_width, config.depth, 1, rng),
                Mlp(enc_map, config.mapping_hidden_width, config.mapping_depth, 2, rng),
                Mlp(enc_map, config.mapping_hidden_width, config.mapping_depth, 2, rng)};
  // Mapping networks start at the identity placement.
  nets.fg.zero_output_layer();
  nets.bg.zero_output_layer();

  const Bootstrap boot = bootstrap(video, static_cast<float>(config.bootstrap_threshold));
  TexelGrid fg_grid(grid, 3, 0.5f), bg_grid(grid, 3, 0.5f);
  for (int gy = 0; gy < grid; ++gy)
    for (int gx = 0; gx < grid; ++gx) {
      const UVCoord uv{uv_coordinate(gx, grid), uv_coordinate(gy, grid)};
      const int px = std::clamp(static_cast<int>(std::lround(texel_coordinate(uv.u, w))), 0, w - 1);
      const int py = std::clamp(static_cast<int>(std::lround(texel_coordinate(uv.v, h))), 0, h - 1);
      for (int c = 0; c < 3; ++c) {
        bg_grid.values()[(static_cast<std::size_t>(gy) * grid + gx) * 3 + c] = boot.median.at(px, py, c);
        fg_grid.values()[(static_cast<std::size_t>(gy) * grid + gx) * 3 + c] = boot.foreground_mean[c];
      }
    }

  const std::size_t total = static_cast<std::size_t>(w) * h * f;
  const int batch = config.batch_size;
  const bool rigid = config.loss_weights.rigidity > 0;
  const int map_cols = rigid ? 3 * batch : batch;
  const float dx = 2.0f / (w - 1), dy = 2.0f / (h - 1);
  const float margin = static_cast<float>(config.alpha_margin);
  const float w_rec = static_cast<float>(config.loss_weights.reconstruction);
  const float w_sparse = static_cast<float>(config.loss_weights.alpha_regularization);
  const float w_rigid = static_cast<float>(config.loss_weights.rigidity);
  const float w_boot = static_cast<float>(config.bootstrap_weight);
  const float w_uv = static_cast<float>(config.uv_bound_weight);
  const int boot_iters = static_cast<int>(std::lround(config.bootstrap_fraction * config.iterations));
  const float inv_b = 1.0f / static_cast<float>(batch);

  std::uniform_int_distribution<std::size_t> pick(0, total - 1);
  std::vector<std::size_t> idx(batch);
  Eigen::MatrixXf coords(3, batch), map_coords(3, map_cols);
  Eigen::MatrixXf g_fg(2, map_cols), g_bg(2, map_cols), g_alpha(1, batch);
  double loss = 0.0;

  for (int it = 0; it < config.iterations; ++it) {
    for (int b = 0; b < batch; ++b) {
      idx[b] = pick(rng);
      pixel_coords(idx[b], w, h, f, coords.col(b).data());
    }
    map_coords.leftCols(batch) = coords;
    if (rigid) {
      map_coords.middleCols(batch, batch) = coords;
      map_coords.middleCols(batch, batch).row(0).array() += dx;
      map_coords.rightCols(batch) = coords;
      map_coords.rightCols(batch).row(1).array() += dy;
    }
    const Eigen::MatrixXf map_enc = positional_encoding(map_coords, config.mapping_encoding_bands);
    const Eigen::MatrixXf& off_fg = nets.fg.forward(map_enc);
    const Eigen::MatrixXf& off_bg = nets.bg.forward(map_enc);
    const Eigen::MatrixXf& logit = nets.alpha.forward(positional_encoding(coords, config.positional_encoding_bands));

    g_fg.setZero();
    g_bg.setZero();
    loss = 0.0;
    const bool booting = it < boot_iters;
    for (int b = 0; b < batch; ++b) {
      const float uf = coords(0, b) + off_fg(0, b), vf = coords(1, b) + off_fg(1, b);
      const float ub = coords(0, b) + off_bg(0, b), vb = coords(1, b) + off_bg(1, b);
      float cf[3], cb[3], dfu[3], dfv[3], dbu[3], dbv[3];
      fg_grid.sample(uf, vf, cf, dfu, dfv);
      bg_grid.sample(ub, vb, cb, dbu, dbv);
      const float s = sigmoid(logit(0, b));
      const float raw = (1.0f + 2.0f * margin) * s - margin;
      const float a = std::clamp(raw, 0.0f, 1.0f);

      const std::size_t pix = idx[b];
      const std::size_t t = pix / (static_cast<std::size_t>(w) * h);
      const std::size_t within = pix % (static_cast<std::size_t>(w) * h);
      const float* target = video.frames[t].data().data() + within * 3;

      float gf[3], gb[3], ga = w_sparse * inv_b;
      loss += w_sparse * a * inv_b;
      for (int c = 0; c < 3; ++c) {
        const float r = (1.0f - a) * cb[c] + a * cf[c] - target[c];
        loss += w_rec * r * r * inv_b;
        const float gc = 2.0f * w_rec * r * inv_b;
        gf[c] = a * gc;
        gb[c] = (1.0f - a) * gc;
        ga += gc * (cf[c] - cb[c]);
        g_fg(0, b) += gf[c] * dfu[c];
        g_fg(1, b) += gf[c] * dfv[c];
        g_bg(0, b) += gb[c] * dbu[c];
        g_bg(1, b) += gb[c] * dbv[c];
      }
      fg_grid.accumulate(uf, vf, gf);
      bg_grid.accumulate(ub, vb, gb);

      float gz = (raw > 0.0f && raw < 1.0f) ? ga * (1.0f + 2.0f * margin) * s * (1.0f - s) : 0.0f;
      if (booting) {
        const float target_alpha = boot.foreground[pix] ? 1.0f : 0.0f;
        loss += w_boot * (s - target_alpha) * (s - target_alpha) * inv_b;
        gz += 2.0f * w_boot * (s - target_alpha) * s * (1.0f - s) * inv_b;
      }
      g_alpha(0, b) = gz;

      const float uvs[4] = {uf, vf, ub, vb};
      for (int k = 0; k < 4; ++k) {
        const float excess = std::abs(uvs[k]) - 1.0f;
        if (excess <= 0) continue;
        loss += w_uv * excess * excess * inv_b;
        const float g = 2.0f * w_uv * excess * (uvs[k] > 0 ? 1.0f : -1.0f) * inv_b;
        (k < 2 ? g_fg : g_bg)(k % 2, b) += g;
      }
    }

    if (rigid) {
      // Offsets from the identity placement should vary slowly: the UV Jacobian stays near identity.
      for (const auto& [off, grad] : {std::pair{&off_fg, &g_fg}, std::pair{&off_bg, &g_bg}})
        for (int b = 0; b < batch; ++b)
          for (int k = 0; k < 2; ++k) {
            const float rx = ((*off)(k, batch + b) - (*off)(k, b)) / dx;
            const float ry = ((*off)(k, 2 * batch + b) - (*off)(k, b)) / dy;
            loss += w_rigid * (rx * rx + ry * ry) * inv_b;
            const float gx = 2.0f * w_rigid * rx * inv_b / dx, gy = 2.0f * w_rigid * ry * inv_b / dy;
            (*grad)(k, batch + b) += gx;
            (*grad)(k, 2 * batch + b) += gy;
            (*grad)(k, b) -= gx + gy;
          }
    }

    nets.fg.backward(g_fg);
    nets.bg.backward(g_bg);
    nets.alpha.backward(g_alpha);

    const double progress_frac = static_cast<double>(it) / config.iterations;
    const double decay = 0.05 + 0.95 * 0.5 * (1.0 + std::cos(std::numbers::pi * progress_frac));
    AdamParams net_params, grid_params;
    net_params.learning_rate = static_cast<float>(config.learning_rate * decay);
    grid_params.learning_rate = static_cast<float>(config.grid_learning_rate * decay);
    nets.alpha.step(net_params);
    nets.fg.step(net_params);
    nets.bg.step(net_params);
    fg_grid.step(grid_params);
    bg_grid.step(grid_params);
    if (progress) progress({it, loss});
  }

  // Freeze lookup tables.
  atlas.uv_fg.resize(2 * total);
  atlas.uv_bg.resize(2 * total);
  atlas.alpha.resize(total);
  constexpr std::size_t kChunk = 8192;
  for (std::size_t start = 0; start < total; start += kChunk) {
    const std::size_t n = std::min(kChunk, total - start);
    Eigen::MatrixXf pc(3, static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) pixel_coords(start + i, w, h, f, pc.col(static_cast<Eigen::Index>(i)).data());
    const Eigen::MatrixXf menc = positional_encoding(pc, config.mapping_encoding_bands);
    const Eigen::MatrixXf of = nets.fg.infer(menc), ob = nets.bg.infer(menc);
    const Eigen::MatrixXf z = nets.alpha.infer(positional_encoding(pc, config.positional_encoding_bands));
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = static_cast<Eigen::Index>(i);
      const std::size_t p = start + i;
      atlas.uv_fg[2 * p] = pc(0, c) + of(0, c);
      atlas.uv_fg[2 * p + 1] = pc(1, c) + of(1, c);
      atlas.uv_bg[2 * p] = pc(0, c) + ob(0, c);
      atlas.uv_bg[2 * p + 1] = pc(1, c) + ob(1, c);
      atlas.alpha[p] = opacity(z(0, c), margin);
    }
  }

  atlas.fg_rgba = rasterize(fg_grid, config.atlas_size, 0.0f);
  atlas.bg_rgba = rasterize(bg_grid, config.atlas_size, 1.0f);

  // Foreground atlas opacity: max-splat pixel opacity at grid resolution, then resample to S.
  TexelGrid coverage(grid, 1, 0.0f);
  for (std::size_t p = 0; p < total; ++p) {
    const int gx = static_cast<int>(std::lround(texel_coordinate(atlas.uv_fg[2 * p], grid)));
    const int gy = static_cast<int>(std::lround(texel_coordinate(atlas.uv_fg[2 * p + 1], grid)));
    float& cell = coverage.values()[static_cast<std::size_t>(gy) * grid + gx];
    cell = std::max(cell, atlas.alpha[p]);
  }
  for (int y = 0; y < config.atlas_size; ++y)
    for (int x = 0; x < config.atlas_size; ++x) {
      float a;
      coverage.sample(static_cast<float>(uv_coordinate(x, config.atlas_size)),
                      static_cast<float>(uv_coordinate(y, config.atlas_size)), &a);
      atlas.fg_rgba.at(x, y, 3) = std::clamp(a, 0.0f, 1.0f);
    }

  nets.alpha.append_weights(atlas.network_weights);
  nets.fg.append_weights(atlas.network_weights);
  nets.bg.append_weights(atlas.network_weights);
  atlas.network_weights.insert(atlas.network_weights.end(), fg_grid.values().begin(), fg_grid.values().end());
  atlas.network_weights.insert(atlas.network_weights.end(), bg_grid.values().begin(), bg_grid.values().end());

  atlas.report.iterations = config.iterations;
  atlas.report.final_loss = loss;
  atlas.report.psnr = psnr(reconstruct_video(atlas), video, 1.0);
  atlas.report.converged = atlas.report.psnr >= config.target_psnr;
  return atlas;
}

}  // namespace atlasedit
