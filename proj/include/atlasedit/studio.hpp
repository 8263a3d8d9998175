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

#include <condition_variable>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "atlasedit/cli.hpp"

namespace httplib {
class Server;
}

namespace atlasedit {

enum class JobStatus { kQueued, kRunning, kDone, kFailed };
std::string to_string(JobStatus status);

struct EditJob {
  std::string id;
  EditRequest request;
  std::optional<std::string> idempotency_key;
  JobStatus status = JobStatus::kQueued;
  std::optional<EditResult> result;
  nlohmann::json manifest;
  std::string error;
  int exit_code = 0;
  std::optional<int> accepted_sample;
};

/// HTTP service over one project directory (the output of decompose).
///
///   GET  /health                      {status: "ok"}
///   GET  /project                     folded manifest plus clip facts
///   GET  /atlas/{layer}               PNG of the white-blended atlas
///   POST /segment                     {token[, layer]} or {point: [x, y], layer}
///   POST /edits                       edit request (+ idempotency_key) -> 202 {id}
///   GET  /edits/{id}                  status, sample thumbnails, artifact URLs
///   GET  /edits/{id}/samples/{k}.png  edited patch of sample k
///   GET  /edits/{id}/artifacts/{name} any file written for the job
///   POST /edits/{id}/accept           {sample} -> composited frames persisted
///   GET  /frames/{k}?variant=...      original or accepted-edit frame PNG
class StudioServer {
 public:
  StudioServer(std::filesystem::path project_dir, AppConfig config, Providers providers);
  ~StudioServer();
  StudioServer(const StudioServer&) = delete;
  StudioServer& operator=(const StudioServer&) = delete;

  /// Binds and serves on background threads. Port 0 picks a free port; a
  /// busy port throws InvalidArgument.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  void stop();
  std::string url() const;

  /// Number of edit jobs that actually ran (not deduplicated submissions).
  int executed_jobs() const;

 private:
  void routes();
  void worker();
  void run(const std::shared_ptr<EditJob>& job);
  nlohmann::json job_json(const EditJob& job) const;
  std::shared_ptr<EditJob> find(const std::string& id) const;

  std::filesystem::path project_dir_;
  AppConfig config_;
  Providers providers_;
  AtlasContainer container_;
  VideoClip original_;
  std::optional<VideoClip> edited_;
  ManifestJournal journal_;

  std::unique_ptr<httplib::Server> server_;
  std::thread listener_;
  std::vector<std::thread> workers_;
  std::string host_;
  int port_ = 0;

  mutable std::mutex mutex_;
  std::condition_variable queue_cv_;
  std::deque<std::shared_ptr<EditJob>> queue_;
  std::map<std::string, std::shared_ptr<EditJob>> jobs_;
  std::map<std::string, std::string> idempotency_;
  int next_id_ = 0;
  int executed_ = 0;
  bool stopping_ = false;
};

}  // namespace atlasedit
