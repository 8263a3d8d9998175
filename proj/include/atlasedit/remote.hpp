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
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "atlasedit/providers.hpp"
#include "atlasedit/wire.hpp"

namespace httplib {
class Server;
}

namespace atlasedit {

struct RemoteOptions {
  double timeout_seconds = 120.0;
  int pool_size = 4;  // concurrent requests per client
};

/// JSON-over-HTTP transport shared by the remote providers. Never retries.
class RemoteClient {
 public:
  RemoteClient(std::string provider, std::string base_url, RemoteOptions options = {});
  wire::Json post(const std::string& path, const wire::Json& body) const;
  const std::string& base_url() const noexcept { return base_url_; }

 private:
  std::string provider_;
  std::string base_url_;
  RemoteOptions options_;
  mutable std::mutex mutex_;
  mutable std::condition_variable slot_free_;
  mutable int in_flight_ = 0;
};

class RemoteSegmenter final : public Segmenter {
 public:
  RemoteSegmenter(std::string base_url, RemoteOptions options = {});

 protected:
  std::vector<Segment> do_segment(const Image& image) const override;

 private:
  RemoteClient client_;
};

class RemoteEdgeDetector final : public EdgeDetector {
 public:
  RemoteEdgeDetector(std::string base_url, RemoteOptions options = {});

 protected:
  Image do_edges(const Image& image) const override;

 private:
  RemoteClient client_;
};

/// Dimensionality comes from the service; it is learned from the first
/// response (or a probe when asked before any call).
class RemoteEmbedder final : public Embedder {
 public:
  RemoteEmbedder(std::string base_url, RemoteOptions options = {});
  int dimension() const override;

 protected:
  Embedding do_embed_image(const Image& image) const override;
  Embedding do_embed_text(const std::string& text) const override;

 private:
  Embedding parse(const wire::Json& j) const;
  RemoteClient client_;
  mutable std::mutex mutex_;
  mutable int dimension_ = 0;
};

class RemoteCaptioner final : public Captioner {
 public:
  RemoteCaptioner(std::string base_url, RemoteOptions options = {});

 protected:
  std::string do_caption(const Image& frame) const override;

 private:
  RemoteClient client_;
};

class RemoteNoisePredictor final : public NoisePredictor {
 public:
  RemoteNoisePredictor(std::string base_url, RemoteOptions options = {});

 protected:
  State do_predict(const State& y, int timestep, const Conditioning& cond) const override;

 private:
  RemoteClient client_;
};

/// Scale and tolerance are declared by the service in every /encode reply.
class RemoteStateEncoder final : public StateEncoder {
 public:
  RemoteStateEncoder(std::string base_url, RemoteOptions options = {});
  int scale() const override;
  double tolerance() const override;

 protected:
  State do_encode(const Image& image) const override;
  Image do_decode(const State& state) const override;

 private:
  void probe() const;
  RemoteClient client_;
  mutable std::mutex mutex_;
  mutable std::optional<std::pair<int, double>> declared_;
};

class RemoteFeatureExtractor final : public FeatureExtractor {
 public:
  RemoteFeatureExtractor(std::string base_url, RemoteOptions options = {});

 protected:
  std::vector<State> do_features(const Image& image) const override;

 private:
  RemoteClient client_;
};

/// Environment variable holding the URL of one provider kind, e.g.
/// ATLASEDIT_PROVIDER_URL_NOISE_PREDICTOR.
std::string provider_url_variable(ProviderKind kind);

/// Remote bundle for every kind whose URL is set in `urls` or, failing
/// that, in the environment. Kinds without a URL stay empty.
Providers make_remote_providers(const std::map<ProviderKind, std::string>& urls = {}, RemoteOptions options = {});

/// Drops httplib's default SO_REUSEPORT so binding a port that is already
/// served fails instead of silently sharing it.
void use_exclusive_port(httplib::Server& server);

/// Serves a provider bundle over the wire protocol. Used to host stubs for
/// integration tests and demos.
class ProviderServer {
 public:
  explicit ProviderServer(Providers providers);
  ~ProviderServer();
  ProviderServer(const ProviderServer&) = delete;
  ProviderServer& operator=(const ProviderServer&) = delete;

  /// Binds (port 0 picks a free port) and serves on a background thread.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  void stop();
  std::string url() const;

 private:
  Providers providers_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  std::string host_;
  int port_ = 0;
};

}  // namespace atlasedit
