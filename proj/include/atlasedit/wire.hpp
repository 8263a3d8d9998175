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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "atlasedit/raster.hpp"

namespace atlasedit::wire {

using Json = nlohmann::json;

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);

// Rasters travel as {"dtype", "shape": [H, W, C], "data": base64 little-endian}.
Json encode(const Image& image);   // float32
Json encode(const Mask& mask);     // uint8
Json encode(const State& state);   // float64
Image decode_image(const Json& j);
Mask decode_mask(const Json& j);
State decode_state(const Json& j);

Json error_body(const std::string& error, const std::string& provider, const std::string& detail);

}  // namespace atlasedit::wire
