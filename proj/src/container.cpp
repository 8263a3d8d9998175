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


#include "atlasedit/container.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "atlasedit/config.hpp"

namespace atlasedit {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void put16(std::vector<std::uint8_t>& b, std::uint16_t v) {
  b.push_back(v & 0xFF);
  b.push_back(v >> 8);
}
void put32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back((v >> (8 * i)) & 0xFF);
}
std::uint16_t get16(const std::vector<std::uint8_t>& b, std::size_t at) {
  require(at + 2 <= b.size(), "npz: truncated archive");
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}
std::uint32_t get32(const std::vector<std::uint8_t>& b, std::size_t at) {
  require(at + 4 <= b.size(), "npz: truncated archive");
  return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) | (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

std::vector<std::uint8_t> encode_npy(const NpyArray& a) {
  std::size_t n = 1;
  for (auto d : a.shape) n *= d;
  require(n == a.data.size(), "npy: data size does not match shape");
  std::string shape = "(";
  for (std::size_t i = 0; i < a.shape.size(); ++i) {
    if (i) shape += ", ";
    shape += std::to_string(a.shape[i]);
  }
  shape += a.shape.size() == 1 ? ",)" : ")";
  std::string header = "{'descr': '<f4', 'fortran_order': False, 'shape': " + shape + ", }";
  const std::size_t total = 10 + header.size() + 1;
  header.append((64 - total % 64) % 64, ' ');
  header += '\n';
  std::vector<std::uint8_t> out = {0x93, 'N', 'U', 'M', 'P', 'Y', 1, 0};
  put16(out, static_cast<std::uint16_t>(header.size()));
  out.insert(out.end(), header.begin(), header.end());
  const auto* bytes = reinterpret_cast<const std::uint8_t*>(a.data.data());
  out.insert(out.end(), bytes, bytes + a.data.size() * sizeof(float));
  return out;
}

NpyArray decode_npy(const std::uint8_t* p, std::size_t size) {
  require(size >= 10 && std::memcmp(p, "\x93NUMPY", 6) == 0, "npy: bad magic");
  const int major = p[6];
  std::size_t header_len, offset;
  if (major == 1) {
    header_len = p[8] | (p[9] << 8);
    offset = 10;
  } else {
    require(size >= 12, "npy: truncated header");
    header_len = p[8] | (p[9] << 8) | (p[10] << 16) | (static_cast<std::size_t>(p[11]) << 24);
    offset = 12;
  }
  require(offset + header_len <= size, "npy: truncated header");
  const std::string header(reinterpret_cast<const char*>(p + offset), header_len);
  require(header.find("'descr': '<f4'") != std::string::npos, "npy: only little-endian float32 arrays are supported");
  require(header.find("'fortran_order': False") != std::string::npos, "npy: fortran order is not supported");
  const auto open = header.find('(', header.find("'shape'"));
  const auto close = header.find(')', open);
  require(open != std::string::npos && close != std::string::npos, "npy: missing shape");
  NpyArray a;
  std::size_t n = 1;
  std::string dims = header.substr(open + 1, close - open - 1);
  std::size_t pos = 0;
  while (pos < dims.size()) {
    const auto comma = dims.find(',', pos);
    const std::string tok = dims.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (tok.find_first_not_of(' ') != std::string::npos) {
      a.shape.push_back(std::stoull(tok));
      n *= a.shape.back();
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  const std::size_t data_at = offset + header_len;
  require(data_at + n * sizeof(float) <= size, "npy: truncated data");
  a.data.resize(n);
  if (n) std::memcpy(a.data.data(), p + data_at, n * sizeof(float));
  return a;
}

NpyArray array_of(std::vector<std::size_t> shape, const std::vector<float>& data) { return {std::move(shape), data}; }

}  // namespace

std::vector<std::uint8_t> encode_npz(const std::map<std::string, NpyArray>& arrays) {
  std::vector<std::uint8_t> out, central;
  std::uint16_t count = 0;
  for (const auto& [name, array] : arrays) {
    const std::string file = name + ".npy";
    const auto payload = encode_npy(array);
    require(payload.size() < 0xFFFFFFFFULL && out.size() < 0xFFFFFFFFULL, "npz: archive too large");
    const auto crc = static_cast<std::uint32_t>(crc32(0L, payload.data(), static_cast<uInt>(payload.size())));
    const auto offset = static_cast<std::uint32_t>(out.size());
    const auto size = static_cast<std::uint32_t>(payload.size());
    // Local file header; DOS date 1980-01-01 00:00 keeps output reproducible.
    put32(out, 0x04034b50);
    put16(out, 20);
    put16(out, 0);
    put16(out, 0);
    put16(out, 0);
    put16(out, 0x21);
    put32(out, crc);
    put32(out, size);
    put32(out, size);
    put16(out, static_cast<std::uint16_t>(file.size()));
    put16(out, 0);
    out.insert(out.end(), file.begin(), file.end());
    out.insert(out.end(), payload.begin(), payload.end());

    put32(central, 0x02014b50);
    put16(central, 20);
    put16(central, 20);
    put16(central, 0);
    put16(central, 0);
    put16(central, 0);
    put16(central, 0x21);
    put32(central, crc);
    put32(central, size);
    put32(central, size);
    put16(central, static_cast<std::uint16_t>(file.size()));
    put16(central, 0);
    put16(central, 0);
    put16(central, 0);
    put16(central, 0);
    put32(central, 0);
    put32(central, offset);
    central.insert(central.end(), file.begin(), file.end());
    ++count;
  }
  const auto cd_offset = static_cast<std::uint32_t>(out.size());
  out.insert(out.end(), central.begin(), central.end());
  put32(out, 0x06054b50);
  put16(out, 0);
  put16(out, 0);
  put16(out, count);
  put16(out, count);
  put32(out, static_cast<std::uint32_t>(central.size()));
  put32(out, cd_offset);
  put16(out, 0);
  return out;
}

std::map<std::string, NpyArray> decode_npz(const std::vector<std::uint8_t>& bytes) {
  require(bytes.size() >= 22, "npz: not a zip archive");
  std::size_t eocd = std::string::npos;
  for (std::size_t i = bytes.size() - 22 + 1; i-- > 0;)
    if (get32(bytes, i) == 0x06054b50) {
      eocd = i;
      break;
    }
  require(eocd != std::string::npos, "npz: missing end of central directory");
  const std::uint16_t count = get16(bytes, eocd + 10);
  std::size_t at = get32(bytes, eocd + 16);
  std::map<std::string, NpyArray> out;
  for (int i = 0; i < count; ++i) {
    require(get32(bytes, at) == 0x02014b50, "npz: bad central directory");
    const std::uint16_t method = get16(bytes, at + 10);
    const std::uint32_t crc = get32(bytes, at + 16);
    const std::uint32_t csize = get32(bytes, at + 20);
    const std::uint16_t name_len = get16(bytes, at + 28), extra_len = get16(bytes, at + 30),
                        comment_len = get16(bytes, at + 32);
    const std::uint32_t local = get32(bytes, at + 42);
    require(at + 46 + name_len <= bytes.size(), "npz: truncated central directory");
    std::string name(reinterpret_cast<const char*>(&bytes[at + 46]), name_len);
    require(method == 0, "npz: compressed members are not supported (" + name + ")");
    require(csize != 0xFFFFFFFFu, "npz: zip64 members are not supported");
    require(get32(bytes, local) == 0x04034b50, "npz: bad local header");
    const std::size_t data = local + 30 + get16(bytes, local + 26) + get16(bytes, local + 28);
    require(data + csize <= bytes.size(), "npz: truncated member " + name);
    require(static_cast<std::uint32_t>(crc32(0L, &bytes[data], csize)) == crc, "npz: CRC mismatch in " + name);
    if (name.size() > 4 && name.ends_with(".npy")) name.resize(name.size() - 4);
    out[name] = decode_npy(&bytes[data], csize);
    at += 46 + name_len + extra_len + comment_len;
  }
  return out;
}

json atlas_sidecar(const AtlasSet& atlas, const std::optional<fs::path>& source_frames) {
  const auto& r = atlas.report;
  json psnr = std::isinf(r.psnr) ? json("inf") : json(r.psnr);
  return json{{"format", "atlasedit-atlas"},
              {"version", 1},
              {"S", atlas.atlas_size},
              {"H", atlas.height},
              {"W", atlas.width},
              {"F", atlas.frames},
              {"config", to_json(atlas.config)},
              {"seed", atlas.seed},
              {"psnr", psnr},
              {"converged", r.converged},
              {"trivial", r.trivial},
              {"iterations", r.iterations},
              {"final_loss", r.final_loss},
              {"source_frames", source_frames ? json(fs::absolute(*source_frames).lexically_normal().string()) : json(nullptr)}};
}

void save_atlas(const fs::path& dir, const AtlasSet& atlas, const std::optional<fs::path>& source_frames) {
  atlas.validate();
  fs::create_directories(dir);
  const auto S = static_cast<std::size_t>(atlas.atlas_size);
  const auto F = static_cast<std::size_t>(atlas.frames), H = static_cast<std::size_t>(atlas.height),
             W = static_cast<std::size_t>(atlas.width);
  std::map<std::string, NpyArray> arrays;
  arrays["fg_rgba"] = array_of({S, S, 4}, atlas.fg_rgba.data());
  arrays["bg_rgba"] = array_of({S, S, 4}, atlas.bg_rgba.data());
  arrays["uv_fg"] = array_of({F, H, W, 2}, atlas.uv_fg);
  arrays["uv_bg"] = array_of({F, H, W, 2}, atlas.uv_bg);
  arrays["alpha"] = array_of({F, H, W}, atlas.alpha);
  arrays["network_weights"] = array_of({atlas.network_weights.size()}, atlas.network_weights);
  const auto bytes = encode_npz(arrays);
  std::ofstream out(dir / "atlas.npz", std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw InvalidArgument("cannot write " + (dir / "atlas.npz").string());
  write_text_file(dir / "atlas.json", atlas_sidecar(atlas, source_frames).dump(2) + "\n");
}

AtlasContainer load_atlas(const fs::path& path) {
  if (!fs::exists(path)) throw InvalidArgument("no atlas container at " + path.string());
  fs::path dir = fs::is_directory(path) ? path : path.parent_path();
  if (dir.empty()) dir = ".";
  const fs::path npz = dir / "atlas.npz", sidecar = dir / "atlas.json";
  if (!fs::exists(npz) || !fs::exists(sidecar)) throw InvalidArgument("no atlas container at " + path.string());
  const json meta = read_json_file(sidecar);
  auto arrays = decode_npz(read_binary_file(npz));
  AtlasContainer c;
  AtlasSet& a = c.atlas;
  try {
    a.atlas_size = meta.at("S").get<int>();
    a.height = meta.at("H").get<int>();
    a.width = meta.at("W").get<int>();
    a.frames = meta.at("F").get<int>();
    a.config = nla_config_from_json(meta.at("config"));
    a.seed = meta.at("seed").get<std::uint64_t>();
    const json& p = meta.at("psnr");
    a.report.psnr = p.is_string() ? std::numeric_limits<double>::infinity() : p.get<double>();
    a.report.converged = meta.at("converged").get<bool>();
    a.report.trivial = meta.value("trivial", false);
    a.report.iterations = meta.value("iterations", 0);
    a.report.final_loss = meta.value("final_loss", 0.0);
    if (meta.contains("source_frames") && meta.at("source_frames").is_string())
      c.source_frames = fs::path(meta.at("source_frames").get<std::string>());
  } catch (const json::exception& e) {
    throw InvalidArgument("malformed atlas sidecar " + sidecar.string() + ": " + e.what());
  }
  auto take = [&](const std::string& name) {
    const auto it = arrays.find(name);
    if (it == arrays.end()) throw InvalidArgument("atlas container lacks array '" + name + "'");
    return std::move(it->second);
  };
  auto raster = [&](const std::string& name) {
    NpyArray arr = take(name);
    require(arr.shape.size() == 3 && arr.shape[0] == static_cast<std::size_t>(a.atlas_size) &&
                arr.shape[1] == static_cast<std::size_t>(a.atlas_size) && arr.shape[2] == 4,
            "atlas array '" + name + "' has the wrong shape");
    Image img(a.atlas_size, a.atlas_size, 4);
    img.data() = std::move(arr.data);
    return img;
  };
  a.fg_rgba = raster("fg_rgba");
  a.bg_rgba = raster("bg_rgba");
  a.uv_fg = take("uv_fg").data;
  a.uv_bg = take("uv_bg").data;
  a.alpha = take("alpha").data;
  if (arrays.count("network_weights")) a.network_weights = take("network_weights").data;
  a.validate();
  return c;
}

ManifestJournal::ManifestJournal(fs::path path) : path_(std::move(path)) {}

json ManifestJournal::append(json record) {
  std::lock_guard lock(mutex_);
  std::size_t seq = 0;
  {
    std::ifstream in(path_);
    std::string line;
    while (std::getline(in, line))
      if (!line.empty()) ++seq;
  }
  record["seq"] = seq;
  if (path_.has_parent_path()) fs::create_directories(path_.parent_path());
  std::ofstream out(path_, std::ios::app);
  out << record.dump() << "\n";
  if (!out) throw InvalidArgument("cannot append to " + path_.string());
  return record;
}

std::vector<json> ManifestJournal::read() const {
  std::lock_guard lock(mutex_);
  std::vector<json> out;
  std::ifstream in(path_);
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) out.push_back(json::parse(line));
  return out;
}

fs::path manifest_path(const fs::path& project_dir) { return project_dir / "manifest.jsonl"; }

std::string relative_to(const fs::path& p, const fs::path& base) {
  const fs::path abs = fs::absolute(p).lexically_normal();
  const fs::path rel = abs.lexically_relative(fs::absolute(base).lexically_normal());
  if (!rel.empty()) return rel.generic_string();
  return abs.generic_string();
}

ProjectManifest fold_manifest(const fs::path& project_dir) {
  ProjectManifest m;
  m.project_dir = project_dir;
  const auto resolve = [&](const json& v) {
    const fs::path p(v.get<std::string>());
    return p.is_absolute() ? p : project_dir / p;
  };
  for (const json& r : ManifestJournal(manifest_path(project_dir)).read()) {
    const std::string event = r.value("event", "");
    if (r.contains("config") && m.config.is_null()) m.config = r.at("config");
    if (r.contains("providers"))
      for (const json& d : r.at("providers"))
        if (std::find(m.providers.begin(), m.providers.end(), d) == m.providers.end()) m.providers.push_back(d);
    if (event == "decompose") {
      if (r.contains("video_source")) m.video_source = resolve(r.at("video_source"));
      m.atlas_container = resolve(r.at("atlas"));
    } else if (event == "edit") {
      m.edit_manifests.push_back(resolve(r.at("manifest")));
    } else if (event == "accept") {
      m.accepted_frames = resolve(r.at("frames"));
    } else if (event == "evaluate") {
      m.metrics_reports.push_back(resolve(r.at("report")));
    }
  }
  std::vector<fs::path> refs(m.edit_manifests.begin(), m.edit_manifests.end());
  refs.insert(refs.end(), m.metrics_reports.begin(), m.metrics_reports.end());
  for (const auto* o : {&m.video_source, &m.atlas_container, &m.accepted_frames})
    if (*o) refs.push_back(**o);
  for (const auto& p : refs)
    if (!fs::exists(p)) m.missing.push_back(p.generic_string());
  return m;
}

json ProjectManifest::to_json() const {
  const auto str = [](const std::optional<fs::path>& p) { return p ? json(p->generic_string()) : json(nullptr); };
  json edits = json::array(), reports = json::array();
  for (const auto& p : edit_manifests) edits.push_back(p.generic_string());
  for (const auto& p : metrics_reports) reports.push_back(p.generic_string());
  return json{{"project_dir", project_dir.generic_string()},
              {"video_source", str(video_source)},
              {"atlas_container", str(atlas_container)},
              {"edit_manifests", edits},
              {"metrics_reports", reports},
              {"providers", providers},
              {"config", config},
              {"accepted_frames", str(accepted_frames)},
              {"missing", missing}};
}

void write_text_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw InvalidArgument("cannot write " + path.string());
}

std::vector<std::uint8_t> read_binary_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace atlasedit
