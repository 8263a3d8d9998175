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


#include "atlasedit/studio.hpp"

#include <httplib.h>

#include <algorithm>
#include <cctype>
#include <cstdio>

#include "atlasedit/remote.hpp"
#include "atlasedit/wire.hpp"

namespace atlasedit {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

void reply_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, int status, const std::string& error, const std::string& detail) {
  reply_json(res, status, {{"error", error}, {"detail", detail}});
}

void reply_png(httplib::Response& res, const Image& img) {
  const auto bytes = encode_png(img);
  res.status = 200;
  res.set_content(std::string(bytes.begin(), bytes.end()), "image/png");
}

Image mask_preview(const Mask& m) {
  Image out(m.width(), m.height(), 1);
  for (std::size_t i = 0; i < m.size(); ++i) out.data()[i] = m.data()[i] ? 1.0f : 0.0f;
  return out;
}

bool safe_name(const std::string& name) {
  return !name.empty() && name.find("..") == std::string::npos &&
         std::all_of(name.begin(), name.end(), [](char c) {
           return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-' || c == '/';
         });
}

}  // namespace

std::string to_string(JobStatus status) {
  switch (status) {
    case JobStatus::kQueued: return "queued";
    case JobStatus::kRunning: return "running";
    case JobStatus::kDone: return "done";
    case JobStatus::kFailed: return "failed";
  }
  return "unknown";
}

StudioServer::StudioServer(fs::path project_dir, AppConfig config, Providers providers)
    : project_dir_(std::move(project_dir)),
      config_(std::move(config)),
      providers_(std::move(providers)),
      container_(load_atlas(project_dir_)),
      original_(load_original(container_)),
      journal_(manifest_path(project_dir_)),
      server_(std::make_unique<httplib::Server>()) {
  use_exclusive_port(*server_);
  const ProjectManifest m = fold_manifest(project_dir_);
  if (m.accepted_frames && fs::is_directory(*m.accepted_frames)) edited_ = read_frames(*m.accepted_frames);
  routes();
}

StudioServer::~StudioServer() { stop(); }

int StudioServer::start(const std::string& host, int port) {
  require(!listener_.joinable(), "studio server already running");
  host_ = host;
  port_ = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
  if (port_ < 0) throw InvalidArgument("port " + std::to_string(port) + " on " + host + " is not available");
  {
    std::lock_guard lock(mutex_);
    stopping_ = false;
  }
  for (int i = 0; i < config_.serve_workers; ++i) workers_.emplace_back([this] { worker(); });
  listener_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port_;
}

void StudioServer::stop() {
  if (server_) server_->stop();
  if (listener_.joinable()) listener_.join();
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
  }
  queue_cv_.notify_all();
  for (auto& w : workers_)
    if (w.joinable()) w.join();
  workers_.clear();
}

std::string StudioServer::url() const { return "http://" + host_ + ":" + std::to_string(port_); }

int StudioServer::executed_jobs() const {
  std::lock_guard lock(mutex_);
  return executed_;
}

std::shared_ptr<EditJob> StudioServer::find(const std::string& id) const {
  std::lock_guard lock(mutex_);
  const auto it = jobs_.find(id);
  return it == jobs_.end() ? nullptr : it->second;
}

void StudioServer::worker() {
  for (;;) {
    std::shared_ptr<EditJob> job;
    {
      std::unique_lock lock(mutex_);
      queue_cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
      if (queue_.empty()) return;
      job = queue_.front();
      queue_.pop_front();
      job->status = JobStatus::kRunning;
      ++executed_;
    }
    run(job);
  }
}

void StudioServer::run(const std::shared_ptr<EditJob>& job) {
  const fs::path dir = project_dir_ / "edits" / job->id;
  try {
    EditResult result = edit_video(container_.atlas, original_, job->request, providers_, config_.pipeline);
    json manifest = write_edit_artifacts(dir, result, job->request, providers_);
    journal_.append({{"event", "edit"},
                     {"id", job->id},
                     {"manifest", relative_to(dir / "edit_manifest.json", project_dir_)},
                     {"providers", manifest.at("providers")}});
    std::lock_guard lock(mutex_);
    job->result = std::move(result);
    job->manifest = std::move(manifest);
    job->status = JobStatus::kDone;
  } catch (const Error& e) {
    journal_.append({{"event", "edit_failed"}, {"id", job->id}, {"error", e.what()}});
    std::lock_guard lock(mutex_);
    job->error = e.what();
    job->exit_code = static_cast<int>(e.exit_code());
    job->status = JobStatus::kFailed;
  } catch (const std::exception& e) {
    journal_.append({{"event", "edit_failed"}, {"id", job->id}, {"error", e.what()}});
    std::lock_guard lock(mutex_);
    job->error = e.what();
    job->exit_code = 1;
    job->status = JobStatus::kFailed;
  }
}

json StudioServer::job_json(const EditJob& job) const {
  const std::string base = "/edits/" + job.id;
  json j = {{"id", job.id},
            {"status", to_string(job.status)},
            {"request", to_json(job.request)},
            {"idempotency_key", job.idempotency_key ? json(*job.idempotency_key) : json(nullptr)},
            {"accepted_sample", job.accepted_sample ? json(*job.accepted_sample) : json(nullptr)}};
  if (job.status == JobStatus::kFailed) {
    j["error"] = job.error;
    j["exit_code"] = job.exit_code;
  }
  if (job.status == JobStatus::kDone) {
    json samples = json::array();
    for (const auto& s : job.manifest.at("samples")) {
      const int k = s.at("index").get<int>();
      samples.push_back({{"index", k},
                         {"thumbnail", base + "/samples/" + std::to_string(k) + ".png"},
                         {"touched_texels", s.at("touched_texels")}});
    }
    json artifacts = json::object();
    for (const auto& [name, file] : job.manifest.at("artifacts").items())
      artifacts[name] = file.is_null() ? json(nullptr) : json(base + "/artifacts/" + file.get<std::string>());
    j["samples"] = samples;
    j["artifacts"] = artifacts;
    j["layer"] = job.manifest.at("layer");
    j["bbox"] = job.manifest.at("bbox");
    j["ablation"] = job.manifest.at("ablation");
    j["timings"] = job.manifest.at("timings");
  }
  return j;
}

void StudioServer::routes() {
  auto& s = *server_;
  s.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    try {
      std::rethrow_exception(ep);
    } catch (const json::exception& e) {
      reply_error(res, 400, "bad_request", e.what());
    } catch (const NotFound& e) {
      reply_error(res, 404, "not_found", e.what());
    } catch (const InvalidArgument& e) {
      reply_error(res, 400, "bad_request", e.what());
    } catch (const ProviderError& e) {
      reply_error(res, 502, "provider_error", e.what());
    } catch (const std::exception& e) {
      reply_error(res, 500, "internal", e.what());
    }
  });

  s.Get("/health", [](const httplib::Request&, httplib::Response& res) { reply_json(res, 200, {{"status", "ok"}}); });

  s.Get("/project", [this](const httplib::Request&, httplib::Response& res) {
    json j = fold_manifest(project_dir_).to_json();
    const auto& a = container_.atlas;
    j["clip"] = {{"frames", a.frames}, {"width", a.width}, {"height", a.height}, {"atlas_size", a.atlas_size}};
    j["layers"] = {"foreground", "background"};
    json ids = json::array();
    {
      std::lock_guard lock(mutex_);
      for (const auto& [id, job] : jobs_) ids.push_back(id);
      j["has_edited_video"] = edited_.has_value();
    }
    j["jobs"] = ids;
    reply_json(res, 200, j);
  });

  s.Get(R"(/atlas/(\w+))", [this](const httplib::Request& req, httplib::Response& res) {
    const Layer layer = parse_layer(req.matches[1]);
    reply_png(res, blend_atlas_for_segmentation(container_.atlas.layer(layer)));
  });

  s.Post("/segment", [this](const httplib::Request& req, httplib::Response& res) {
    const json body = json::parse(req.body);
    std::optional<std::string> token;
    if (body.contains("token")) token = body.at("token").get<std::string>();
    std::optional<std::pair<int, int>> point;
    if (body.contains("point")) {
      const auto p = body.at("point").get<std::vector<int>>();
      require(p.size() == 2, "point must be [x, y]");
      point = std::make_pair(p[0], p[1]);
    }
    require(token.has_value() != point.has_value(), "segment needs exactly one of 'token' or 'point'");
    require(providers_.segmenter != nullptr, "no segmenter configured");
    Layer layer;
    if (body.contains("layer") && !body.at("layer").is_null())
      layer = parse_layer(body.at("layer").get<std::string>());
    else if (token)
      layer = select_layer({*token}, config_.pipeline.foreground_classes);
    else
      throw InvalidArgument("a point query needs a layer");
    const Image blended = blend_atlas_for_segmentation(container_.atlas.layer(layer));
    if (point) {
      require(point->first >= 0 && point->second >= 0 && point->first < blended.width() &&
                  point->second < blended.height(),
              "point lies outside the atlas");
    }
    Mask mask(blended.width(), blended.height(), 1);
    std::vector<std::string> labels;
    for (const auto& seg : providers_.segmenter->segment(blended)) {
      const bool hit = token ? lower(seg.label) == lower(*token) : seg.mask.at(point->first, point->second) != 0;
      if (!hit) continue;
      labels.push_back(seg.label);
      for (std::size_t i = 0; i < mask.size(); ++i) mask.data()[i] |= seg.mask.data()[i] ? 1 : 0;
    }
    if (labels.empty())
      throw NotFound(token ? "no segment matches tokens: " + *token : "no segment under the selected point");
    const auto png = encode_png(mask_preview(mask));
    reply_json(res, 200,
               {{"layer", to_string(layer)},
                {"labels", labels},
                {"area", count_set(mask)},
                {"bbox",
                 [&] {
                   const Rect r = bounding_box(mask);
                   return json{{"x", r.x}, {"y", r.y}, {"width", r.width}, {"height", r.height}};
                 }()},
                {"mask", wire::encode(mask)},
                {"preview_png", wire::base64_encode(png)}});
  });

  s.Post("/edits", [this](const httplib::Request& req, httplib::Response& res) {
    const json body = json::parse(req.body);
    EditRequest request = parse_edit_request(body, config_.defaults);
    std::optional<std::string> key;
    if (body.contains("idempotency_key") && !body.at("idempotency_key").is_null())
      key = body.at("idempotency_key").get<std::string>();
    std::shared_ptr<EditJob> job;
    bool duplicate = false;
    {
      std::lock_guard lock(mutex_);
      if (key) {
        if (const auto it = idempotency_.find(*key); it != idempotency_.end()) {
          job = jobs_.at(it->second);
          duplicate = true;
        }
      }
      if (!job) {
        char id[32];
        std::snprintf(id, sizeof id, "edit-%04d", next_id_++);
        job = std::make_shared<EditJob>();
        job->id = id;
        job->request = request;
        job->idempotency_key = key;
        jobs_[job->id] = job;
        if (key) idempotency_[*key] = job->id;
      }
    }
    if (!duplicate) {
      journal_.append({{"event", "edit_submitted"}, {"id", job->id}, {"request", to_json(request)}});
      {
        std::lock_guard lock(mutex_);
        queue_.push_back(job);
      }
      queue_cv_.notify_one();
    }
    reply_json(res, 202, {{"id", job->id}, {"duplicate", duplicate}, {"url", "/edits/" + job->id}});
  });

  s.Get(R"(/edits/([\w-]+))", [this](const httplib::Request& req, httplib::Response& res) {
    const auto job = find(req.matches[1]);
    if (!job) return reply_error(res, 404, "not_found", "unknown edit job");
    std::lock_guard lock(mutex_);
    reply_json(res, 200, job_json(*job));
  });

  s.Get(R"(/edits/([\w-]+)/samples/(\d+)\.png)", [this](const httplib::Request& req, httplib::Response& res) {
    const auto job = find(req.matches[1]);
    if (!job) return reply_error(res, 404, "not_found", "unknown edit job");
    std::lock_guard lock(mutex_);
    if (job->status != JobStatus::kDone) return reply_error(res, 409, "not_ready", "job is " + to_string(job->status));
    const auto k = std::stoul(req.matches[2]);
    if (k >= job->result->samples.size()) return reply_error(res, 404, "not_found", "no such sample");
    reply_png(res, job->result->samples[k].patch);
  });

  s.Get(R"(/edits/([\w-]+)/artifacts/(.+))", [this](const httplib::Request& req, httplib::Response& res) {
    const auto job = find(req.matches[1]);
    const std::string name = req.matches[2];
    if (!job || !safe_name(name)) return reply_error(res, 404, "not_found", "unknown artifact");
    const fs::path file = project_dir_ / "edits" / job->id / name;
    if (!fs::is_regular_file(file)) return reply_error(res, 404, "not_found", "unknown artifact");
    const auto bytes = read_binary_file(file);
    res.set_content(std::string(bytes.begin(), bytes.end()),
                    file.extension() == ".png" ? "image/png" : "application/json");
  });

  s.Post(R"(/edits/([\w-]+)/accept)", [this](const httplib::Request& req, httplib::Response& res) {
    const auto job = find(req.matches[1]);
    if (!job) return reply_error(res, 404, "not_found", "unknown edit job");
    const json body = req.body.empty() ? json::object() : json::parse(req.body);
    const int k = body.value("sample", 0);
    VideoClip video;
    {
      std::lock_guard lock(mutex_);
      if (job->status != JobStatus::kDone)
        return reply_error(res, 409, "not_ready", "job is " + to_string(job->status));
      if (k < 0 || k >= static_cast<int>(job->result->samples.size()))
        return reply_error(res, 400, "bad_request", "no such sample");
      video = job->result->samples[k].video;
    }
    const fs::path frames = project_dir_ / "accepted" / job->id;
    write_frames(frames, video);
    journal_.append({{"event", "accept"},
                     {"id", job->id},
                     {"sample", k},
                     {"frames", relative_to(frames, project_dir_)}});
    const int count = video.frame_count();
    {
      std::lock_guard lock(mutex_);
      job->accepted_sample = k;
      edited_ = std::move(video);
    }
    reply_json(res, 200, {{"id", job->id}, {"sample", k}, {"frames", count}, {"first_frame", "/frames/0?variant=edited"}});
  });

  s.Get(R"(/frames/(\d+))", [this](const httplib::Request& req, httplib::Response& res) {
    const std::string variant = req.has_param("variant") ? req.get_param_value("variant") : "original";
    if (variant != "original" && variant != "edited")
      return reply_error(res, 400, "bad_request", "variant must be 'original' or 'edited'");
    const auto k = std::stoul(req.matches[1]);
    std::lock_guard lock(mutex_);
    const VideoClip* clip = variant == "original" ? &original_ : (edited_ ? &*edited_ : nullptr);
    if (!clip) return reply_error(res, 404, "not_found", "no edit has been accepted");
    if (k >= clip->frames.size()) return reply_error(res, 404, "not_found", "frame index out of range");
    reply_png(res, clip->frames[k]);
  });
}

}  // namespace atlasedit
