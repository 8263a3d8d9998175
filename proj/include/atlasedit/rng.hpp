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

#include <cstdint>
#include <random>
#include <string_view>

#include "atlasedit/raster.hpp"

namespace atlasedit {

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL) noexcept;

/// Independent generator derived from a command seed, a stream name and an index.
std::mt19937_64 substream(std::uint64_t seed, std::string_view name, std::uint64_t index = 0);

/// Standard-normal draws into every element of `s`, in storage order.
void fill_normal(State& s, std::mt19937_64& rng);

}  // namespace atlasedit
