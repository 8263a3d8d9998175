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


#include "atlasedit/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <sstream>

#include "atlasedit/nla.hpp"
#include "atlasedit/remote.hpp"
#include "atlasedit/stubs.hpp"

namespace atlasedit {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

json rect_json(const Rect& r) { return {{"x", r.x}, {"y", r.y}, {"width", r.width}, {"height", r.height}}; }

std::string sample_name(int k) { return "sample_" + std::to_string(k); }

Mask touched_union(const EditResult& result) {
  Mask u;
  for (const auto& s : result.samples) {
    if (u.empty()) u = Mask(s.touched.mask.width(), s.touched.mask.height(), 1);
    for (std::size_t i = 0; i < u.size(); ++i) u.data()[i] |= s.touched.mask.data()[i] ? 1 : 0;
  }
  return u;
}

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::vector<double> grid_axis(const json& grid, const char* key, double fallback) {
  if (!grid.contains(key)) return {fallback};
  std::vector<double> v;
  try {
    v = grid.at(key).get<std::vector<double>>();
  } catch (const json::exception&) {
    throw InvalidArgument(std::string("grid axis '") + key + "' must be a list of numbers");
  }
  return v;
}

}  // namespace

AppConfig resolve_config(const CommonOptions& options) {
  return options.config ? load_config(*options.config) : AppConfig{};
}

Providers build_providers(const std::string& flag, const AppConfig& config) {
  if (flag == "stub") {
    StubOptions o;
    o.seed = config.providers.seed;
    o.schedule = config.pipeline.schedule;
    o.label_rules = config.providers.label_rules;
    o.edge_gain = config.providers.edge_gain;
    return make_stub_providers(o);
  }
  if (flag == "remote") {
    RemoteOptions o;
    o.timeout_seconds = config.providers.timeout_seconds;
    o.pool_size = config.providers.pool_size;
    return make_remote_providers({}, o);
  }
  throw InvalidArgument("--providers must be 'stub' or 'remote', got '" + flag + "'");
}

json descriptors_json(const Providers& providers) {
  json out = json::array();
  for (const auto& d : providers.descriptors())
    out.push_back({{"kind", to_string(d.kind)},
                   {"name", d.name},
                   {"deterministic", d.deterministic},
                   {"concurrency_safe", d.concurrency_safe},
                   {"endpoint", d.endpoint ? json(*d.endpoint) : json(nullptr)}});
  return out;
}

DecomposeOutcome cmd_decompose(const fs::path& frames_dir, const CommonOptions& options) {
  if (!fs::is_directory(frames_dir)) throw InvalidArgument("frames directory not found: " + frames_dir.string());
  const AppConfig config = resolve_config(options);
  const VideoClip clip = read_frames(frames_dir);
  const std::uint64_t seed = options.seed.value_or(0);
  DecomposeOutcome outcome{train_nla(clip, config.nla, seed), options.out / "atlas.npz"};
  save_atlas(options.out, outcome.atlas, frames_dir);
  write_text_file(options.out / "config.json", to_json(config).dump(2) + "\n");
  const auto& r = outcome.atlas.report;
  ManifestJournal(manifest_path(options.out))
      .append({{"event", "decompose"},
               {"video_source", relative_to(frames_dir, options.out)},
               {"atlas", "atlas.npz"},
               {"config", to_json(config)},
               {"seed", seed},
               {"psnr", number(r.psnr)},
               {"converged", r.converged},
               {"providers", json::array()}});
  if (!r.converged)
    throw DomainError("atlas fit did not converge: PSNR " + format_double(r.psnr) + " dB below target " +
                      format_double(config.nla.target_psnr) + " dB (container written)");
  return outcome;
}

VideoClip load_original(const AtlasContainer& container) {
  if (container.source_frames && fs::is_directory(*container.source_frames)) {
    try {
      VideoClip clip = read_frames(*container.source_frames);
      if (clip.frame_count() == container.atlas.frames && clip.width() == container.atlas.width &&
          clip.height() == container.atlas.height)
        return clip;
    } catch (const Error&) {
    }
  }
  return reconstruct_video(container.atlas);
}

json write_edit_artifacts(const fs::path& dir, const EditResult& result, const EditRequest& request,
                          const Providers& providers) {
  fs::create_directories(dir);
  json artifacts = {{"blended_atlas", "blended_atlas.png"},
                    {"mask", "mask.png"},
                    {"hed", "hed.png"},
                    {"patch_in", "patch_in.png"},
                    {"touched_region", "touched_region.png"}};
  write_png(dir / "blended_atlas.png", result.blended_atlas);
  write_png(dir / "mask.png", result.patch.mask);
  if (!result.patch.hed.empty()) write_png(dir / "hed.png", result.patch.hed);
  else artifacts["hed"] = nullptr;
  write_png(dir / "patch_in.png", result.patch.source);
  write_png(dir / "touched_region.png", touched_union(result));

  json samples = json::array();
  for (std::size_t k = 0; k < result.samples.size(); ++k) {
    const auto& s = result.samples[k];
    const std::string patch = "patch_out_" + std::to_string(k) + ".png";
    const std::string atlas = "edited_atlas_" + std::to_string(k) + ".png";
    const fs::path frames = fs::path("edited") / sample_name(static_cast<int>(k));
    write_png(dir / patch, s.patch);
    write_png(dir / atlas, s.atlas.layer(result.layer));
    write_frames(dir / frames, s.video);
    samples.push_back({{"index", k},
                       {"patch", patch},
                       {"edited_atlas", atlas},
                       {"frames", frames.generic_string()},
                       {"touched_texels", count_set(s.touched.mask)}});
  }
  json timings = json::object();
  for (const auto& [k, v] : result.timings) timings[k] = v;
  json manifest = {{"request", to_json(request)},
                   {"seed", request.seed},
                   {"layer", to_string(result.layer)},
                   {"bbox", rect_json(result.patch.bbox)},
                   {"ablation", {{"mask", request.use_mask ? "✓" : "✗"}, {"hed", request.use_hed ? "✓" : "✗"}}},
                   {"providers", descriptors_json(providers)},
                   {"artifacts", artifacts},
                   {"samples", samples},
                   {"timings", timings}};
  write_text_file(dir / "edit_manifest.json", manifest.dump(2) + "\n");
  return manifest;
}

json without_timings(json manifest) {
  manifest.erase("timings");
  return manifest;
}

EditOutcome cmd_edit(const fs::path& atlas_path, const EditOptions& edit, const CommonOptions& options) {
  const AppConfig config = resolve_config(options);
  EditRequest request = parse_edit_request(read_json_file(edit.request), config.defaults);
  if (options.seed) request.seed = *options.seed;
  if (edit.samples) request.num_samples = *edit.samples;
  if (edit.no_mask) request.use_mask = false;
  if (edit.no_hed) request.use_hed = false;
  request.validate();

  const AtlasContainer container = load_atlas(atlas_path);
  const VideoClip original = load_original(container);
  const Providers providers = build_providers(options.providers, config);
  EditOutcome outcome{edit_video(container.atlas, original, request, providers, config.pipeline), request, {}};
  outcome.manifest = write_edit_artifacts(options.out, outcome.result, request, providers);

  const fs::path project = fs::is_directory(atlas_path) ? atlas_path : atlas_path.parent_path();
  ManifestJournal(manifest_path(project.empty() ? fs::path(".") : project))
      .append({{"event", "edit"},
               {"manifest", relative_to(options.out / "edit_manifest.json", project)},
               {"providers", outcome.manifest.at("providers")}});
  return outcome;
}

std::vector<ScoredVideoPair> load_pairs(const fs::path& pairs_spec, const Captioner* captioner, bool* masked) {
  const json spec = read_json_file(pairs_spec);
  const fs::path base = pairs_spec.parent_path();
  const auto at = [&](const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? path : base / path;
  };
  if (masked) *masked = spec.value("masked", false);
  if (!spec.contains("pairs") || !spec.at("pairs").is_array()) throw InvalidArgument("pairs spec needs a 'pairs' list");
  std::vector<ScoredVideoPair> pairs;
  for (const json& e : spec.at("pairs")) {
    ScoredVideoPair p;
    p.name = e.value("name", "pair_" + std::to_string(pairs.size()));
    p.method = e.value("method", "default");
    try {
      p.source = read_frames(at(e.at("source").get<std::string>()));
      p.edited = read_frames(at(e.at("edited").get<std::string>()));
      if (e.contains("mask") && !e.at("mask").is_null()) p.gt_mask = read_mask_frames(at(e.at("mask").get<std::string>()));
    } catch (const json::exception& ex) {
      throw InvalidArgument("pair '" + p.name + "': " + ex.what());
    } catch (const Error&) {
      // Unreadable inputs surface as an error entry for this pair.
    }
    const auto caption = [&](const char* key, const VideoClip& clip) -> std::string {
      if (e.contains(key) && e.at(key).is_string()) return e.at(key).get<std::string>();
      if (captioner && !clip.frames.empty()) return captioner->caption(clip.frames.front());
      return {};
    };
    p.source_caption = caption("source_caption", p.source);
    p.target_caption = caption("target_caption", p.edited);
    pairs.push_back(std::move(p));
  }
  return pairs;
}

json to_json(const MetricsReport& report) {
  json videos = json::array();
  for (const auto& v : report.videos) {
    json values = json::object();
    for (const auto& [k, x] : v.values) values[k] = number(x);
    videos.push_back({{"name", v.name}, {"values", values}, {"error", v.error ? json(*v.error) : json(nullptr)}});
  }
  json corpus = json::object();
  for (const auto& [k, s] : report.corpus)
    corpus[k] = {{"mean", number(s.mean)}, {"stddev", number(s.stddev)}, {"count", s.count}};
  json methods = json::object();
  for (const auto& [m, vals] : report.method_means)
    for (const auto& [k, x] : vals) methods[m][k] = number(x);
  return json{{"videos", videos},
              {"corpus", corpus},
              {"s_dir_skipped_frames", report.s_dir_skipped_frames},
              {"psnr_peak", report.psnr_peak},
              {"method_means", methods},
              {"aggregate_semantic", report.aggregate_semantic},
              {"aggregate_similarity", report.aggregate_similarity},
              {"wall_clock_seconds", report.wall_clock_seconds}};
}

std::string to_csv(const MetricsReport& report) {
  std::vector<std::string> columns;
  for (const auto& v : report.videos)
    for (const auto& [k, x] : v.values)
      if (std::find(columns.begin(), columns.end(), k) == columns.end()) columns.push_back(k);
  std::sort(columns.begin(), columns.end());
  std::ostringstream os;
  os << "name";
  for (const auto& c : columns) os << ',' << c;
  os << ",error\n";
  for (const auto& v : report.videos) {
    os << csv_cell(v.name);
    for (const auto& c : columns) {
      os << ',';
      if (const auto it = v.values.find(c); it != v.values.end()) os << format_double(it->second);
    }
    os << ',' << csv_cell(v.error.value_or("")) << '\n';
  }
  return os.str();
}

EvaluateOutcome cmd_evaluate(const fs::path& pairs_spec, const CommonOptions& options) {
  const AppConfig config = resolve_config(options);
  const Providers providers = build_providers(options.providers, config);
  bool masked = false;
  const auto pairs = load_pairs(pairs_spec, providers.captioner.get(), &masked);
  EvaluateOutcome outcome;
  outcome.report = evaluate_pairs(pairs, providers, {masked, config.psnr_peak});
  outcome.all_failed = !outcome.report.videos.empty();
  for (const auto& v : outcome.report.videos) outcome.all_failed = outcome.all_failed && v.error.has_value();
  write_text_file(options.out / "metrics.json", to_json(outcome.report).dump(2) + "\n");
  write_text_file(options.out / "metrics.csv", to_csv(outcome.report));
  ManifestJournal(manifest_path(options.out))
      .append({{"event", "evaluate"}, {"report", "metrics.json"}, {"providers", descriptors_json(providers)}});
  if (outcome.all_failed) throw InvalidArgument("every pair failed evaluation; see metrics.json");
  return outcome;
}

double in_mask_divergence(const Image& edited, const Image& source, const Mask& mask) {
  require(edited.same_shape(source), "divergence needs equally shaped patches");
  const Mask m = mask.same_extent(edited) ? mask : max_pool(mask, edited.width(), edited.height());
  double sum = 0;
  for (int y = 0; y < edited.height(); ++y)
    for (int x = 0; x < edited.width(); ++x)
      if (m.at(x, y))
        for (int c = 0; c < edited.channels(); ++c) {
          const double d = static_cast<double>(edited.at(x, y, c)) - source.at(x, y, c);
          sum += d * d;
        }
  return std::sqrt(sum);
}

std::vector<SweepPoint> cmd_sweep(const fs::path& atlas_path, const fs::path& request_path, const fs::path& grid_spec,
                                  const CommonOptions& options) {
  const AppConfig config = resolve_config(options);
  EditRequest base = parse_edit_request(read_json_file(request_path), config.defaults);
  if (options.seed) base.seed = *options.seed;
  const json grid = read_json_file(grid_spec);
  require(grid.is_object(), "grid spec must be a JSON object");
  for (const auto& [k, v] : grid.items())
    require(k == "rho" || k == "lambda", "unknown grid axis '" + k + "'");
  const auto rhos = grid_axis(grid, "rho", base.rho);
  const auto lambdas = grid_axis(grid, "lambda", base.lambda_hed);
  if (grid.empty() || rhos.empty() || lambdas.empty()) throw InvalidArgument("sweep grid is empty");

  const AtlasContainer container = load_atlas(atlas_path);
  const VideoClip original = load_original(container);
  const Providers providers = build_providers(options.providers, config);
  std::vector<SweepPoint> points;
  json rows = json::array();
  for (double rho : rhos)
    for (double lambda : lambdas) {
      EditRequest req = base;
      req.rho = rho;
      req.lambda_hed = lambda;
      req.validate();
      SweepPoint p;
      p.rho = rho;
      p.lambda = lambda;
      char name[64];
      std::snprintf(name, sizeof name, "point_%03zu", points.size());
      p.dir = options.out / name;
      const EditResult r = edit_video(container.atlas, original, req, providers, config.pipeline);
      write_edit_artifacts(p.dir, r, req, providers);
      const auto& s = r.samples.front();
      p.divergence = in_mask_divergence(s.patch, r.patch.source, r.patch.mask);
      p.touched_texels = count_set(s.touched.mask);
      p.video_psnr = psnr(original, s.video);
      rows.push_back({{"rho", rho},
                      {"lambda", lambda},
                      {"divergence", p.divergence},
                      {"touched_texels", p.touched_texels},
                      {"video_psnr", number(p.video_psnr)},
                      {"dir", name}});
      points.push_back(p);
    }
  write_text_file(options.out / "sweep.json",
                  json{{"request", to_json(base)}, {"points", rows}}.dump(2) + "\n");
  std::ostringstream csv;
  csv << "rho,lambda,divergence,touched_texels,video_psnr,dir\n";
  for (const auto& p : points)
    csv << format_double(p.rho) << ',' << format_double(p.lambda) << ',' << format_double(p.divergence) << ','
        << p.touched_texels << ',' << format_double(p.video_psnr) << ',' << p.dir.filename().string() << '\n';
  write_text_file(options.out / "sweep.csv", csv.str());
  return points;
}

}  // namespace atlasedit
