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


#include "atlasedit/remote.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>

#include <httplib.h>

namespace atlasedit {

using wire::Json;

namespace {

ProviderDescriptor remote_descriptor(ProviderKind kind, const std::string& url) {
  ProviderDescriptor d;
  d.kind = kind;
  d.name = "remote-" + to_string(kind);
  d.deterministic = false;
  d.concurrency_safe = true;
  d.endpoint = url;
  return d;
}

std::string upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

RemoteClient::RemoteClient(std::string provider, std::string base_url, RemoteOptions options)
    : provider_(std::move(provider)), base_url_(std::move(base_url)), options_(options) {
  require(!base_url_.empty(), "remote provider '" + provider_ + "' needs a URL");
  require(options_.timeout_seconds > 0 && options_.pool_size >= 1, "remote options out of range");
  while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
}

Json RemoteClient::post(const std::string& path, const Json& body) const {
  {
    std::unique_lock lock(mutex_);
    slot_free_.wait(lock, [&] { return in_flight_ < options_.pool_size; });
    ++in_flight_;
  }
  struct Release {
    const RemoteClient* self;
    ~Release() {
      std::lock_guard lock(self->mutex_);
      --self->in_flight_;
      self->slot_free_.notify_one();
    }
  } release{this};

  const std::string endpoint = base_url_ + path;
  httplib::Client cli(base_url_);
  const auto timeout = std::chrono::duration<double>(options_.timeout_seconds);
  const auto us = std::chrono::duration_cast<std::chrono::microseconds>(timeout);
  cli.set_connection_timeout(us);
  cli.set_read_timeout(us);
  cli.set_write_timeout(us);
  const auto start = std::chrono::steady_clock::now();
  auto res = cli.Post(path, body.dump(), "application/json");
  if (!res) {
    const auto err = res.error();
    const bool timed_out = err == httplib::Error::ConnectionTimeout ||
                           (err == httplib::Error::Read && std::chrono::steady_clock::now() - start >= timeout * 0.9);
    if (timed_out)
      throw Timeout(provider_, "timed out after " + std::to_string(options_.timeout_seconds) + " s calling " + endpoint);
    throw ProviderError(provider_, "transport error calling " + endpoint + ": " + httplib::to_string(err));
  }
  Json reply;
  try {
    reply = Json::parse(res->body);
  } catch (const Json::exception&) {
    throw ProviderError(provider_, endpoint + " returned HTTP " + std::to_string(res->status) + " with a non-JSON body");
  }
  if (res->status != 200) {
    const std::string detail = reply.is_object() ? reply.value("detail", std::string{}) : std::string{};
    const std::string error = reply.is_object() ? reply.value("error", std::string{"error"}) : std::string{"error"};
    throw ProviderError(provider_, endpoint + " failed (HTTP " + std::to_string(res->status) + ", " + error + "): " + detail);
  }
  return reply;
}

// ------------------------------------------------------------------ clients

RemoteSegmenter::RemoteSegmenter(std::string base_url, RemoteOptions options)
    : Segmenter(remote_descriptor(ProviderKind::kSegmenter, base_url)),
      client_(descriptor().name, std::move(base_url), options) {}

std::vector<Segment> RemoteSegmenter::do_segment(const Image& image) const {
  const Json reply = client_.post("/segment", {{"image", wire::encode(image)}});
  std::vector<Segment> out;
  try {
    for (const auto& s : reply.at("segments")) {
      Segment seg;
      seg.label = s.at("label").get<std::string>();
      seg.score = s.value("score", 1.0);
      seg.mask = wire::decode_mask(s.at("mask"));
      if (!seg.mask.same_extent(image)) throw InvalidArgument("segment mask dims differ from the image");
      out.push_back(std::move(seg));
    }
  } catch (const std::exception& e) {
    throw ProviderError(descriptor().name, std::string("malformed /segment reply: ") + e.what());
  }
  return out;
}

RemoteEdgeDetector::RemoteEdgeDetector(std::string base_url, RemoteOptions options)
    : EdgeDetector(remote_descriptor(ProviderKind::kEdgeDetector, base_url)),
      client_(descriptor().name, std::move(base_url), options) {}

Image RemoteEdgeDetector::do_edges(const Image& image) const {
  const Json reply = client_.post("/edges", {{"image", wire::encode(image)}});
  try {
    Image e = wire::decode_image(reply.at("edges"));
    for (float& v : e.data()) v = std::clamp(v, 0.0f, 1.0f);
    return e;
  } catch (const std::exception& ex) {
    throw ProviderError(descriptor().name, std::string("malformed /edges reply: ") + ex.what());
  }
}

RemoteEmbedder::RemoteEmbedder(std::string base_url, RemoteOptions options)
    : Embedder(remote_descriptor(ProviderKind::kEmbedder, base_url)),
      client_(descriptor().name, std::move(base_url), options) {}

Embedding RemoteEmbedder::parse(const Json& j) const {
  Embedding e;
  try {
    e = j.at("embedding").get<Embedding>();
  } catch (const std::exception& ex) {
    throw ProviderError(descriptor().name, std::string("malformed embedding reply: ") + ex.what());
  }
  std::lock_guard lock(mutex_);
  if (dimension_ == 0) dimension_ = static_cast<int>(e.size());
  if (static_cast<int>(e.size()) != dimension_)
    throw ProviderError(descriptor().name, "embedding dimension changed between calls");
  return e;
}

int RemoteEmbedder::dimension() const {
  {
    std::lock_guard lock(mutex_);
    if (dimension_ > 0) return dimension_;
  }
  return static_cast<int>(embed_text("").size());
}

Embedding RemoteEmbedder::do_embed_image(const Image& image) const {
  return parse(client_.post("/embed/image", {{"image", wire::encode(image)}}));
}

Embedding RemoteEmbedder::do_embed_text(const std::string& text) const {
  return parse(client_.post("/embed/text", {{"text", text}}));
}

RemoteCaptioner::RemoteCaptioner(std::string base_url, RemoteOptions options)
    : Captioner(remote_descriptor(ProviderKind::kCaptioner, base_url)),
      client_(descriptor().name, std::move(base_url), options) {}

std::string RemoteCaptioner::do_caption(const Image& frame) const {
  const Json reply = client_.post("/caption", {{"image", wire::encode(frame)}});
  if (!reply.contains("caption") || !reply.at("caption").is_string())
    throw ProviderError(descriptor().name, "malformed /caption reply");
  return reply.at("caption").get<std::string>();
}

RemoteNoisePredictor::RemoteNoisePredictor(std::string base_url, RemoteOptions options)
    : NoisePredictor(remote_descriptor(ProviderKind::kNoisePredictor, base_url)),
      client_(descriptor().name, std::move(base_url), options) {}

State RemoteNoisePredictor::do_predict(const State& y, int timestep, const Conditioning& cond) const {
  Json body{{"state", wire::encode(y)},
            {"timestep", timestep},
            {"prompt", cond.prompt},
            {"edges", cond.edges ? wire::encode(*cond.edges) : Json(nullptr)},
            {"lambda", cond.lambda},
            {"guidance_scale", cond.guidance_scale}};
  const Json reply = client_.post("/predict_noise", body);
  try {
    State eps = wire::decode_state(reply.at("epsilon"));
    if (!eps.same_shape(y)) throw InvalidArgument("epsilon shape differs from the state");
    return eps;
  } catch (const std::exception& ex) {
    throw ProviderError(descriptor().name, std::string("malformed /predict_noise reply: ") + ex.what());
  }
}

RemoteStateEncoder::RemoteStateEncoder(std::string base_url, RemoteOptions options)
    : StateEncoder(remote_descriptor(ProviderKind::kStateEncoder, base_url)),
      client_(descriptor().name, std::move(base_url), options) {}

State RemoteStateEncoder::do_encode(const Image& image) const {
  const Json reply = client_.post("/encode", {{"image", wire::encode(image)}});
  try {
    State s = wire::decode_state(reply.at("state"));
    std::lock_guard lock(mutex_);
    declared_ = std::make_pair(reply.at("scale").get<int>(), reply.at("tolerance").get<double>());
    return s;
  } catch (const std::exception& ex) {
    throw ProviderError(descriptor().name, std::string("malformed /encode reply: ") + ex.what());
  }
}

Image RemoteStateEncoder::do_decode(const State& state) const {
  const Json reply = client_.post("/decode", {{"state", wire::encode(state)}});
  try {
    return wire::decode_image(reply.at("image"));
  } catch (const std::exception& ex) {
    throw ProviderError(descriptor().name, std::string("malformed /decode reply: ") + ex.what());
  }
}

void RemoteStateEncoder::probe() const {
  {
    std::lock_guard lock(mutex_);
    if (declared_) return;
  }
  encode(Image(16, 16, 3, 0.5f));
}

int RemoteStateEncoder::scale() const {
  probe();
  std::lock_guard lock(mutex_);
  return declared_->first;
}

double RemoteStateEncoder::tolerance() const {
  probe();
  std::lock_guard lock(mutex_);
  return declared_->second;
}

RemoteFeatureExtractor::RemoteFeatureExtractor(std::string base_url, RemoteOptions options)
    : FeatureExtractor(remote_descriptor(ProviderKind::kFeatureExtractor, base_url)),
      client_(descriptor().name, std::move(base_url), options) {}

std::vector<State> RemoteFeatureExtractor::do_features(const Image& image) const {
  const Json reply = client_.post("/features", {{"image", wire::encode(image)}});
  std::vector<State> out;
  try {
    for (const auto& f : reply.at("features")) out.push_back(wire::decode_state(f));
  } catch (const std::exception& ex) {
    throw ProviderError(descriptor().name, std::string("malformed /features reply: ") + ex.what());
  }
  return out;
}

std::string provider_url_variable(ProviderKind kind) { return "ATLASEDIT_PROVIDER_URL_" + upper(to_string(kind)); }

Providers make_remote_providers(const std::map<ProviderKind, std::string>& urls, RemoteOptions options) {
  auto url_for = [&](ProviderKind kind) -> std::string {
    if (const auto it = urls.find(kind); it != urls.end()) return it->second;
    if (const char* v = std::getenv(provider_url_variable(kind).c_str())) return v;
    return {};
  };
  Providers p;
  if (auto u = url_for(ProviderKind::kSegmenter); !u.empty()) p.segmenter = std::make_shared<RemoteSegmenter>(u, options);
  if (auto u = url_for(ProviderKind::kEdgeDetector); !u.empty())
    p.edge_detector = std::make_shared<RemoteEdgeDetector>(u, options);
  if (auto u = url_for(ProviderKind::kEmbedder); !u.empty()) p.embedder = std::make_shared<RemoteEmbedder>(u, options);
  if (auto u = url_for(ProviderKind::kCaptioner); !u.empty()) p.captioner = std::make_shared<RemoteCaptioner>(u, options);
  if (auto u = url_for(ProviderKind::kNoisePredictor); !u.empty())
    p.noise_predictor = std::make_shared<RemoteNoisePredictor>(u, options);
  if (auto u = url_for(ProviderKind::kStateEncoder); !u.empty())
    p.state_encoder = std::make_shared<RemoteStateEncoder>(u, options);
  if (auto u = url_for(ProviderKind::kFeatureExtractor); !u.empty())
    p.feature_extractor = std::make_shared<RemoteFeatureExtractor>(u, options);
  return p;
}

// ------------------------------------------------------------------- server

void use_exclusive_port(httplib::Server& server) {
  server.set_socket_options([](socket_t sock) {
    int yes = 1;
    ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes), sizeof yes);
  });
}

ProviderServer::ProviderServer(Providers providers)
    : providers_(std::move(providers)), server_(std::make_unique<httplib::Server>()) {
  use_exclusive_port(*server_);
  auto route = [this](const std::string& path, const std::shared_ptr<Provider>& provider, auto handler) {
    server_->Post(path, [provider, handler, path](const httplib::Request& req, httplib::Response& res) {
      const std::string name = provider ? provider->descriptor().name : "none";
      auto reply = [&](int status, const Json& j) { res.status = status, res.set_content(j.dump(), "application/json"); };
      if (!provider) return reply(404, wire::error_body("unavailable", name, "no provider serves " + path));
      try {
        reply(200, handler(Json::parse(req.body)));
      } catch (const Json::exception& e) {
        reply(400, wire::error_body("bad_request", name, e.what()));
      } catch (const InvalidArgument& e) {
        reply(400, wire::error_body("bad_request", name, e.what()));
      } catch (const std::exception& e) {
        reply(500, wire::error_body("provider_failure", name, e.what()));
      }
    });
  };
  const Providers& p = providers_;
  route("/segment", p.segmenter, [s = p.segmenter](const Json& body) {
    Json segs = Json::array();
    for (const auto& seg : s->segment(wire::decode_image(body.at("image"))))
      segs.push_back({{"label", seg.label}, {"score", seg.score}, {"mask", wire::encode(seg.mask)}});
    return Json{{"segments", segs}};
  });
  route("/edges", p.edge_detector, [e = p.edge_detector](const Json& body) {
    return Json{{"edges", wire::encode(e->edges(wire::decode_image(body.at("image"))))}};
  });
  route("/embed/image", p.embedder, [e = p.embedder](const Json& body) {
    const auto v = e->embed_image(wire::decode_image(body.at("image")));
    return Json{{"embedding", v}, {"dimension", v.size()}};
  });
  route("/embed/text", p.embedder, [e = p.embedder](const Json& body) {
    const auto v = e->embed_text(body.at("text").get<std::string>());
    return Json{{"embedding", v}, {"dimension", v.size()}};
  });
  route("/caption", p.captioner, [c = p.captioner](const Json& body) {
    return Json{{"caption", c->caption(wire::decode_image(body.at("image")))}};
  });
  route("/predict_noise", p.noise_predictor, [n = p.noise_predictor](const Json& body) {
    Conditioning cond;
    cond.prompt = body.value("prompt", std::string{});
    if (body.contains("edges") && !body.at("edges").is_null())
      cond.edges = std::make_shared<const Image>(wire::decode_image(body.at("edges")));
    cond.lambda = body.value("lambda", 1.0);
    cond.guidance_scale = body.value("guidance_scale", 7.5);
    const State y = wire::decode_state(body.at("state"));
    return Json{{"epsilon", wire::encode(n->predict(y, body.at("timestep").get<int>(), cond))}};
  });
  route("/encode", p.state_encoder, [e = p.state_encoder](const Json& body) {
    return Json{{"state", wire::encode(e->encode(wire::decode_image(body.at("image"))))},
                {"scale", e->scale()},
                {"tolerance", e->tolerance()}};
  });
  route("/decode", p.state_encoder, [e = p.state_encoder](const Json& body) {
    return Json{{"image", wire::encode(e->decode(wire::decode_state(body.at("state"))))}};
  });
  route("/features", p.feature_extractor, [f = p.feature_extractor](const Json& body) {
    Json feats = Json::array();
    for (const auto& s : f->features(wire::decode_image(body.at("image")))) feats.push_back(wire::encode(s));
    return Json{{"features", feats}};
  });
}

ProviderServer::~ProviderServer() { stop(); }

int ProviderServer::start(const std::string& host, int port) {
  require(!thread_.joinable(), "provider server already running");
  host_ = host;
  port_ = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
  if (port_ < 0) throw InvalidArgument("cannot bind provider server to " + host + ":" + std::to_string(port));
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port_;
}

void ProviderServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

std::string ProviderServer::url() const { return "http://" + host_ + ":" + std::to_string(port_); }

}  // namespace atlasedit
