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

#include <Eigen/Core>
#include <random>
#include <vector>

namespace atlasedit {

/// Sinusoidal encoding of each input row: [x, sin(2^k pi x), cos(2^k pi x)]_{k<bands}.
/// Columns are samples.
Eigen::MatrixXf positional_encoding(const Eigen::MatrixXf& coords, int bands);
int encoded_width(int dims, int bands) noexcept;

struct AdamParams {
  float learning_rate = 1e-3f;
  float beta1 = 0.9f;
  float beta2 = 0.999f;
  float epsilon = 1e-8f;
};

/// ReLU multilayer perceptron with a linear output layer and an Adam optimizer.
/// Batches are column-major (one sample per column).
class Mlp {
 public:
  Mlp() = default;
  Mlp(int inputs, int hidden, int hidden_layers, int outputs, std::mt19937_64& rng);

  /// Forward pass caching activations for backward().
  const Eigen::MatrixXf& forward(const Eigen::MatrixXf& x);
  Eigen::MatrixXf infer(const Eigen::MatrixXf& x) const;

  /// Accumulates parameter gradients for the cached batch.
  void backward(const Eigen::MatrixXf& grad_out);
  void step(const AdamParams& params);

  void zero_output_layer();
  void append_weights(std::vector<float>& out) const;
  std::size_t parameter_count() const noexcept;

 private:
  struct Dense {
    Eigen::MatrixXf w;
    Eigen::VectorXf b;
    Eigen::MatrixXf gw, mw, vw;
    Eigen::VectorXf gb, mb, vb;
  };
  std::vector<Dense> layers_;
  std::vector<Eigen::MatrixXf> inputs_;  // input to each layer
  Eigen::MatrixXf output_;
  long steps_ = 0;
};

/// Dense learnable texel grid sampled bilinearly at normalized coordinates,
/// trained with its own Adam state.
class TexelGrid {
 public:
  TexelGrid() = default;
  TexelGrid(int side, int channels, float fill);

  int side() const noexcept { return side_; }
  int channels() const noexcept { return channels_; }
  std::vector<float>& values() noexcept { return values_; }
  const std::vector<float>& values() const noexcept { return values_; }

  /// Samples at (u,v); writes d(value)/du and d(value)/dv per channel when requested.
  void sample(float u, float v, float* out, float* du = nullptr, float* dv = nullptr) const noexcept;
  void accumulate(float u, float v, const float* grad) noexcept;
  void step(const AdamParams& params);

 private:
  int side_ = 0;
  int channels_ = 0;
  std::vector<float> values_, grad_, m_, v_;
  long steps_ = 0;
};

}  // namespace atlasedit
