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

#include <vector>

namespace atlasedit {

struct ScheduleConfig {
  int train_steps = 1000;
  double beta_start = 1e-4;
  double beta_end = 2e-2;
  int inference_steps = 50;

  void validate() const;
};

/// Linear-beta diffusion schedule with an evenly subsampled inference map.
/// alpha_bar(0) is exactly 1; the inference map has inference_steps + 1
/// entries running from timestep 0 to train_steps.
class NoiseSchedule {
 public:
  explicit NoiseSchedule(const ScheduleConfig& config = {});

  const ScheduleConfig& config() const noexcept { return config_; }
  int train_steps() const noexcept { return config_.train_steps; }
  int inference_steps() const noexcept { return config_.inference_steps; }

  double alpha_bar(int timestep) const;
  const std::vector<double>& alpha_bars() const noexcept { return alpha_bar_; }
  double beta(int timestep) const;

  const std::vector<int>& inference_map() const noexcept { return map_; }
  int timestep(int index) const;
  double alpha_bar_at(int index) const { return alpha_bar(timestep(index)); }

 private:
  ScheduleConfig config_;
  std::vector<double> alpha_bar_;
  std::vector<int> map_;
};

}  // namespace atlasedit
