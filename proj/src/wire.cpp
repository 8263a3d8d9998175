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


#include "atlasedit/wire.hpp"

#include <array>
#include <bit>
#include <cstring>

namespace atlasedit::wire {

namespace {

constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

static_assert(std::endian::native == std::endian::little, "wire encoding assumes a little-endian host");

template <typename T>
Json encode_raster(const Raster<T>& r, const char* dtype) {
  const auto* bytes = reinterpret_cast<const std::uint8_t*>(r.data().data());
  return Json{{"dtype", dtype},
              {"shape", {r.height(), r.width(), r.channels()}},
              {"data", base64_encode({bytes, r.size() * sizeof(T)})}};
}

template <typename T>
Raster<T> decode_raster(const Json& j, const char* dtype) {
  if (!j.is_object() || !j.contains("dtype") || !j.contains("shape") || !j.contains("data"))
    throw InvalidArgument("raster payload needs dtype, shape and data");
  if (j.at("dtype").get<std::string>() != dtype)
    throw InvalidArgument("raster dtype " + j.at("dtype").get<std::string>() + ", expected " + dtype);
  const auto shape = j.at("shape").get<std::vector<int>>();
  if (shape.size() < 2 || shape.size() > 3) throw InvalidArgument("raster shape must be [H, W] or [H, W, C]");
  const int h = shape[0], w = shape[1], c = shape.size() == 3 ? shape[2] : 1;
  Raster<T> r(w, h, c);
  const auto bytes = base64_decode(j.at("data").get<std::string>());
  if (bytes.size() != r.size() * sizeof(T)) throw InvalidArgument("raster data length does not match its shape");
  if (!bytes.empty()) std::memcpy(r.data().data(), bytes.data(), bytes.size());
  return r;
}

}  // namespace

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    for (int s = 18; s >= 0; s -= 6) out += kAlphabet[(v >> s) & 63];
  }
  const std::size_t rest = bytes.size() - i;
  if (rest > 0) {
    std::uint32_t v = bytes[i] << 16;
    if (rest == 2) v |= bytes[i + 1] << 8;
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += rest == 2 ? kAlphabet[(v >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  static const std::array<int, 256> table = [] {
    std::array<int, 256> t{};
    t.fill(-1);
    for (int i = 0; i < 64; ++i) t[static_cast<unsigned char>(kAlphabet[i])] = i;
    return t;
  }();
  if (text.size() % 4 != 0) throw InvalidArgument("base64 text length is not a multiple of 4");
  std::vector<std::uint8_t> out;
  out.reserve(text.size() / 4 * 3);
  std::uint32_t acc = 0;
  int bits = 0;
  for (char ch : text) {
    if (ch == '=') break;
    const int v = table[static_cast<unsigned char>(ch)];
    if (v < 0) throw InvalidArgument("invalid base64 character");
    acc = (acc << 6) | static_cast<std::uint32_t>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<std::uint8_t>((acc >> bits) & 0xFF));
    }
  }
  return out;
}

Json encode(const Image& image) { return encode_raster(image, "float32"); }
Json encode(const Mask& mask) { return encode_raster(mask, "uint8"); }
Json encode(const State& state) { return encode_raster(state, "float64"); }
Image decode_image(const Json& j) { return decode_raster<float>(j, "float32"); }
Mask decode_mask(const Json& j) { return decode_raster<std::uint8_t>(j, "uint8"); }
State decode_state(const Json& j) { return decode_raster<double>(j, "float64"); }

Json error_body(const std::string& error, const std::string& provider, const std::string& detail) {
  return Json{{"error", error}, {"provider", provider}, {"detail", detail}};
}

}  // namespace atlasedit::wire
