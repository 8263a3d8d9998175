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


#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>

#include "atlasedit/video.hpp"

namespace atlasedit {

namespace fs = std::filesystem;

void VideoClip::validate() const {
  require(frame_count() >= 2, "video needs at least 2 frames, got " + std::to_string(frame_count()));
  const Image& first = frames.front();
  require(first.width() > 0 && first.height() > 0, "video frames are empty");
  for (const Image& f : frames) {
    require(f.width() == first.width() && f.height() == first.height(), "video frames differ in size");
    require(f.channels() == 3, "video frames must be RGB");
    for (float v : f.data()) require(v >= 0.0f && v <= 1.0f, "video values must lie in [0,1]");
  }
}

float quantize8(float v) noexcept {
  const float c = std::clamp(v, 0.0f, 1.0f);
  return static_cast<float>(std::lround(c * 255.0f)) / 255.0f;
}

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const noexcept {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

void png_write_to_vector(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::vector<unsigned char>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

void png_flush_noop(png_structp) {}

std::vector<unsigned char> encode_rows(int width, int height, int color_type, int channels,
                                       const std::vector<unsigned char>& pixels) {
  std::vector<unsigned char> out;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw Error("png: cannot create write struct");
  png_infop info = png_create_info_struct(png);
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error("png: encode failed");
  }
  png_set_write_fn(png, &out, png_write_to_vector, png_flush_noop);
  png_set_IHDR(png, info, width, height, 8, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_set_compression_level(png, 6);
  png_write_info(png, info);
  const std::size_t stride = static_cast<std::size_t>(width) * channels;
  for (int y = 0; y < height; ++y)
    png_write_row(png, const_cast<png_bytep>(pixels.data() + y * stride));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

void write_bytes(const fs::path& path, const std::vector<unsigned char>& bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  FilePtr f(std::fopen(path.string().c_str(), "wb"));
  if (!f) throw InvalidArgument("cannot write " + path.string());
  if (std::fwrite(bytes.data(), 1, bytes.size(), f.get()) != bytes.size())
    throw Error("short write to " + path.string());
}

}  // namespace

std::vector<unsigned char> encode_png(const Image& img) {
  require(img.channels() >= 1 && img.channels() <= 4, "png: unsupported channel count");
  static constexpr int kTypes[] = {0, PNG_COLOR_TYPE_GRAY, PNG_COLOR_TYPE_GRAY_ALPHA, PNG_COLOR_TYPE_RGB,
                                   PNG_COLOR_TYPE_RGBA};
  std::vector<unsigned char> px(img.size());
  for (std::size_t i = 0; i < img.size(); ++i)
    px[i] = static_cast<unsigned char>(std::lround(std::clamp(img.data()[i], 0.0f, 1.0f) * 255.0f));
  return encode_rows(img.width(), img.height(), kTypes[img.channels()], img.channels(), px);
}

void write_png(const fs::path& path, const Image& img) { write_bytes(path, encode_png(img)); }

void write_png(const fs::path& path, const Mask& mask) {
  std::vector<unsigned char> px(mask.pixel_count());
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x) px[static_cast<std::size_t>(y) * mask.width() + x] = mask.at(x, y) ? 255 : 0;
  write_bytes(path, encode_rows(mask.width(), mask.height(), PNG_COLOR_TYPE_GRAY, 1, px));
}

Image read_png(const fs::path& path) {
  FilePtr f(std::fopen(path.string().c_str(), "rb"));
  if (!f) throw InvalidArgument("cannot open " + path.string());
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw Error("png: cannot create read struct");
  png_infop info = png_create_info_struct(png);
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw InvalidArgument("not a readable PNG: " + path.string());
  }
  png_init_io(png, f.get());
  png_read_info(png, info);
  png_set_palette_to_rgb(png);
  png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_swap(png);  // 16-bit samples in host (little-endian) order
  png_read_update_info(png, info);
  const int width = static_cast<int>(png_get_image_width(png, info));
  const int height = static_cast<int>(png_get_image_height(png, info));
  const int channels = png_get_channels(png, info);
  const int depth = png_get_bit_depth(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  std::vector<unsigned char> buf(rowbytes * height);
  std::vector<png_bytep> rows(height);
  for (int y = 0; y < height; ++y) rows[y] = buf.data() + y * rowbytes;
  png_read_image(png, rows.data());
  png_destroy_read_struct(&png, &info, nullptr);

  Image img(width, height, channels);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      for (int c = 0; c < channels; ++c) {
        const std::size_t i = static_cast<std::size_t>(x) * channels + c;
        float v;
        if (depth == 16) {
          const auto* p = rows[y] + 2 * i;
          v = static_cast<float>(p[0] | (p[1] << 8)) / 65535.0f;
        } else {
          v = static_cast<float>(rows[y][i]) / 255.0f;
        }
        img.at(x, y, c) = v;
      }
  return img;
}

Mask read_mask_png(const fs::path& path) {
  Image img = read_png(path);
  Mask m(img.width(), img.height(), 1);
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) m.at(x, y) = img.at(x, y, 0) >= 0.5f ? 1 : 0;
  return m;
}

namespace {

std::vector<fs::path> png_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw InvalidArgument("not a frames directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".png") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw InvalidArgument("no PNG frames in " + dir.string());
  return files;
}

Image to_rgb(const Image& img) {
  if (img.channels() == 3) return img;
  Image out(img.width(), img.height(), 3);
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = img.at(x, y, img.channels() >= 3 ? c : 0);
  return out;
}

}  // namespace

VideoClip read_frames(const fs::path& dir) {
  VideoClip clip;
  for (const auto& p : png_files(dir)) clip.frames.push_back(to_rgb(read_png(p)));
  return clip;
}

std::vector<Mask> read_mask_frames(const fs::path& dir) {
  std::vector<Mask> masks;
  for (const auto& p : png_files(dir)) masks.push_back(read_mask_png(p));
  return masks;
}

std::string frame_filename(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "frame_%05d.png", index);
  return buf;
}

void write_frames(const fs::path& dir, const VideoClip& clip) {
  fs::create_directories(dir);
  for (int t = 0; t < clip.frame_count(); ++t) write_png(dir / frame_filename(t), clip.frames[t]);
}

}  // namespace atlasedit
