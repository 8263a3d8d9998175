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


#include "atlasedit/schedule.hpp"

#include <cmath>
#include <string>

#include "atlasedit/error.hpp"

namespace atlasedit {

void ScheduleConfig::validate() const {
  require(train_steps >= 1, "schedule: train_steps must be positive");
  require(inference_steps >= 1 && inference_steps <= train_steps, "schedule: inference_steps must be in [1, train_steps]");
  require(beta_start > 0 && beta_end >= beta_start && beta_end < 1, "schedule: need 0 < beta_start <= beta_end < 1");
}

NoiseSchedule::NoiseSchedule(const ScheduleConfig& config) : config_(config) {
  config_.validate();
  const int n = config_.train_steps;
  alpha_bar_.resize(n + 1);
  alpha_bar_[0] = 1.0;
  for (int t = 1; t <= n; ++t) alpha_bar_[t] = alpha_bar_[t - 1] * (1.0 - beta(t));
  const int k = config_.inference_steps;
  map_.resize(k + 1);
  for (int i = 0; i <= k; ++i) map_[i] = static_cast<int>(std::lround(static_cast<double>(i) * n / k));
}

double NoiseSchedule::beta(int timestep) const {
  require(timestep >= 1 && timestep <= config_.train_steps, "schedule: beta timestep out of range");
  if (config_.train_steps == 1) return config_.beta_start;
  return config_.beta_start +
         (config_.beta_end - config_.beta_start) * (timestep - 1) / static_cast<double>(config_.train_steps - 1);
}

double NoiseSchedule::alpha_bar(int timestep) const {
  require(timestep >= 0 && timestep <= config_.train_steps, "schedule: timestep " + std::to_string(timestep) + " out of range");
  return alpha_bar_[timestep];
}

int NoiseSchedule::timestep(int index) const {
  require(index >= 0 && index <= config_.inference_steps, "schedule: inference index " + std::to_string(index) + " out of range");
  return map_[index];
}

}  // namespace atlasedit
