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


#include "atlasedit/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace atlasedit {

int encoded_width(int dims, int bands) noexcept { return dims * (1 + 2 * bands); }

Eigen::MatrixXf positional_encoding(const Eigen::MatrixXf& coords, int bands) {
  const Eigen::Index dims = coords.rows();
  Eigen::MatrixXf out(encoded_width(static_cast<int>(dims), bands), coords.cols());
  out.topRows(dims) = coords;
  for (int k = 0; k < bands; ++k) {
    const float freq = static_cast<float>(std::ldexp(std::numbers::pi, k));
    const Eigen::MatrixXf arg = coords * freq;
    out.middleRows(dims * (1 + 2 * k), dims) = arg.array().sin().matrix();
    out.middleRows(dims * (2 + 2 * k), dims) = arg.array().cos().matrix();
  }
  return out;
}

Mlp::Mlp(int inputs, int hidden, int hidden_layers, int outputs, std::mt19937_64& rng) {
  std::vector<int> sizes{inputs};
  for (int i = 0; i < hidden_layers; ++i) sizes.push_back(hidden);
  sizes.push_back(outputs);
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
    Dense d;
    const int fan_in = sizes[i];
    const float bound = std::sqrt(6.0f / static_cast<float>(fan_in));
    std::uniform_real_distribution<float> dist(-bound, bound);
    d.w.resize(sizes[i + 1], sizes[i]);
    for (Eigen::Index c = 0; c < d.w.cols(); ++c)
      for (Eigen::Index r = 0; r < d.w.rows(); ++r) d.w(r, c) = dist(rng);
    d.b = Eigen::VectorXf::Zero(sizes[i + 1]);
    d.gw = d.mw = d.vw = Eigen::MatrixXf::Zero(d.w.rows(), d.w.cols());
    d.gb = d.mb = d.vb = Eigen::VectorXf::Zero(d.b.size());
    layers_.push_back(std::move(d));
  }
}

const Eigen::MatrixXf& Mlp::forward(const Eigen::MatrixXf& x) {
  inputs_.resize(layers_.size());
  inputs_[0] = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    Eigen::MatrixXf z = layers_[i].w * inputs_[i];
    z.colwise() += layers_[i].b;
    if (i + 1 < layers_.size())
      inputs_[i + 1] = z.cwiseMax(0.0f);
    else
      output_ = std::move(z);
  }
  return output_;
}

Eigen::MatrixXf Mlp::infer(const Eigen::MatrixXf& x) const {
  Eigen::MatrixXf a = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    Eigen::MatrixXf z = layers_[i].w * a;
    z.colwise() += layers_[i].b;
    a = i + 1 < layers_.size() ? Eigen::MatrixXf(z.cwiseMax(0.0f)) : z;
  }
  return a;
}

void Mlp::backward(const Eigen::MatrixXf& grad_out) {
  Eigen::MatrixXf g = grad_out;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    Dense& d = layers_[i];
    d.gw.noalias() += g * inputs_[i].transpose();
    d.gb += g.rowwise().sum();
    if (i == 0) break;
    Eigen::MatrixXf prev = d.w.transpose() * g;
    // ReLU derivative: the cached input of layer i is the activation of layer i-1.
    g = (inputs_[i].array() > 0.0f).select(prev, 0.0f);
  }
}

void Mlp::step(const AdamParams& p) {
  ++steps_;
  const float c1 = 1.0f - std::pow(p.beta1, static_cast<float>(steps_));
  const float c2 = 1.0f - std::pow(p.beta2, static_cast<float>(steps_));
  const float lr = p.learning_rate * std::sqrt(c2) / c1;
  for (Dense& d : layers_) {
    d.mw = p.beta1 * d.mw + (1.0f - p.beta1) * d.gw;
    d.vw = p.beta2 * d.vw + (1.0f - p.beta2) * d.gw.cwiseAbs2();
    d.w.array() -= lr * d.mw.array() / (d.vw.array().sqrt() + p.epsilon);
    d.mb = p.beta1 * d.mb + (1.0f - p.beta1) * d.gb;
    d.vb = p.beta2 * d.vb + (1.0f - p.beta2) * d.gb.cwiseAbs2();
    d.b.array() -= lr * d.mb.array() / (d.vb.array().sqrt() + p.epsilon);
    d.gw.setZero();
    d.gb.setZero();
  }
}

void Mlp::zero_output_layer() {
  layers_.back().w.setZero();
  layers_.back().b.setZero();
}

void Mlp::append_weights(std::vector<float>& out) const {
  for (const Dense& d : layers_) {
    out.insert(out.end(), d.w.data(), d.w.data() + d.w.size());
    out.insert(out.end(), d.b.data(), d.b.data() + d.b.size());
  }
}

std::size_t Mlp::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const Dense& d : layers_) n += static_cast<std::size_t>(d.w.size() + d.b.size());
  return n;
}

TexelGrid::TexelGrid(int side, int channels, float fill)
    : side_(side), channels_(channels) {
  const std::size_t n = static_cast<std::size_t>(side) * side * channels;
  values_.assign(n, fill);
  grad_.assign(n, 0.0f);
  m_.assign(n, 0.0f);
  v_.assign(n, 0.0f);
}

namespace {

struct GridTaps {
  int x0, x1, y0, y1;
  float fx, fy;
  float dscale_x, dscale_y;  // d(texel)/d(uv), zero when clamped
};

GridTaps grid_taps(int side, float u, float v) noexcept {
  GridTaps t{};
  const float half = 0.5f * static_cast<float>(side - 1);
  auto axis = [&](float c, int& i0, int& i1, float& f, float& ds) {
    ds = (c > -1.0f && c < 1.0f) ? half : 0.0f;
    const float pos = (std::clamp(c, -1.0f, 1.0f) + 1.0f) * half;
    i0 = std::min(static_cast<int>(pos), side - 2);
    i1 = i0 + 1;
    f = pos - static_cast<float>(i0);
  };
  axis(u, t.x0, t.x1, t.fx, t.dscale_x);
  axis(v, t.y0, t.y1, t.fy, t.dscale_y);
  return t;
}

}  // namespace

void TexelGrid::sample(float u, float v, float* out, float* du, float* dv) const noexcept {
  const GridTaps t = grid_taps(side_, u, v);
  const float* p00 = &values_[(static_cast<std::size_t>(t.y0) * side_ + t.x0) * channels_];
  const float* p10 = &values_[(static_cast<std::size_t>(t.y0) * side_ + t.x1) * channels_];
  const float* p01 = &values_[(static_cast<std::size_t>(t.y1) * side_ + t.x0) * channels_];
  const float* p11 = &values_[(static_cast<std::size_t>(t.y1) * side_ + t.x1) * channels_];
  for (int c = 0; c < channels_; ++c) {
    const float top = p00[c] + t.fx * (p10[c] - p00[c]);
    const float bot = p01[c] + t.fx * (p11[c] - p01[c]);
    out[c] = top + t.fy * (bot - top);
    if (du) du[c] = ((1.0f - t.fy) * (p10[c] - p00[c]) + t.fy * (p11[c] - p01[c])) * t.dscale_x;
    if (dv) dv[c] = (bot - top) * t.dscale_y;
  }
}

void TexelGrid::accumulate(float u, float v, const float* grad) noexcept {
  const GridTaps t = grid_taps(side_, u, v);
  const float w00 = (1 - t.fx) * (1 - t.fy), w10 = t.fx * (1 - t.fy), w01 = (1 - t.fx) * t.fy, w11 = t.fx * t.fy;
  float* g00 = &grad_[(static_cast<std::size_t>(t.y0) * side_ + t.x0) * channels_];
  float* g10 = &grad_[(static_cast<std::size_t>(t.y0) * side_ + t.x1) * channels_];
  float* g01 = &grad_[(static_cast<std::size_t>(t.y1) * side_ + t.x0) * channels_];
  float* g11 = &grad_[(static_cast<std::size_t>(t.y1) * side_ + t.x1) * channels_];
  for (int c = 0; c < channels_; ++c) {
    g00[c] += w00 * grad[c];
    g10[c] += w10 * grad[c];
    g01[c] += w01 * grad[c];
    g11[c] += w11 * grad[c];
  }
}

void TexelGrid::step(const AdamParams& p) {
  ++steps_;
  const float c1 = 1.0f - std::pow(p.beta1, static_cast<float>(steps_));
  const float c2 = 1.0f - std::pow(p.beta2, static_cast<float>(steps_));
  const float lr = p.learning_rate * std::sqrt(c2) / c1;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const float g = grad_[i];
    m_[i] = p.beta1 * m_[i] + (1.0f - p.beta1) * g;
    v_[i] = p.beta2 * v_[i] + (1.0f - p.beta2) * g * g;
    values_[i] -= lr * m_[i] / (std::sqrt(v_[i]) + p.epsilon);
    grad_[i] = 0.0f;
  }
}

}  // namespace atlasedit
