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


#include "atlasedit/config.hpp"

#include <fstream>
#include <set>

namespace atlasedit {

namespace {

void reject_unknown(const Json& j, const std::set<std::string>& known, const std::string& where) {
  require(j.is_object(), where + " must be a JSON object");
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) throw InvalidArgument("unknown key '" + k + "' in " + where);
}

template <typename T>
void read(const Json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw InvalidArgument(std::string("config key '") + key + "' has the wrong type");
  }
}

}  // namespace

void AppConfig::validate() const {
  nla.validate();
  pipeline.validate();
  require(defaults.rho >= 0 && defaults.rho <= 1, "default rho must lie in [0,1]");
  require(defaults.lambda_hed >= 0, "default lambda must be non-negative");
  require(defaults.guidance_scale >= 1, "default guidance scale must be at least 1");
  require(defaults.num_samples >= 1, "default num_samples must be at least 1");
  require(providers.timeout_seconds > 0 && providers.pool_size >= 1, "provider transport settings out of range");
  require(psnr_peak > 0, "psnr peak must be positive");
  require(serve_workers >= 1, "serve needs at least one worker");
}

Json to_json(const CoordinateNetworkConfig& c) {
  return Json{{"hidden_width", c.hidden_width},
              {"depth", c.depth},
              {"positional_encoding_bands", c.positional_encoding_bands},
              {"learning_rate", c.learning_rate},
              {"iterations", c.iterations},
              {"loss_weights",
               {{"reconstruction", c.loss_weights.reconstruction},
                {"alpha_regularization", c.loss_weights.alpha_regularization},
                {"rigidity", c.loss_weights.rigidity}}},
              {"mapping_hidden_width", c.mapping_hidden_width},
              {"mapping_depth", c.mapping_depth},
              {"mapping_encoding_bands", c.mapping_encoding_bands},
              {"atlas_size", c.atlas_size},
              {"grid_resolution", c.grid_resolution},
              {"grid_learning_rate", c.grid_learning_rate},
              {"batch_size", c.batch_size},
              {"target_psnr", c.target_psnr},
              {"alpha_margin", c.alpha_margin},
              {"bootstrap_fraction", c.bootstrap_fraction},
              {"bootstrap_weight", c.bootstrap_weight},
              {"bootstrap_threshold", c.bootstrap_threshold},
              {"uv_bound_weight", c.uv_bound_weight}};
}

CoordinateNetworkConfig nla_config_from_json(const Json& j) {
  CoordinateNetworkConfig c;
  reject_unknown(j, {"hidden_width", "depth", "positional_encoding_bands", "learning_rate", "iterations",
                     "loss_weights", "mapping_hidden_width", "mapping_depth", "mapping_encoding_bands", "atlas_size",
                     "grid_resolution", "grid_learning_rate", "batch_size", "target_psnr", "alpha_margin",
                     "bootstrap_fraction", "bootstrap_weight", "bootstrap_threshold", "uv_bound_weight"},
                 "nla config");
  read(j, "hidden_width", c.hidden_width);
  read(j, "depth", c.depth);
  read(j, "positional_encoding_bands", c.positional_encoding_bands);
  read(j, "learning_rate", c.learning_rate);
  read(j, "iterations", c.iterations);
  if (j.contains("loss_weights")) {
    const Json& w = j.at("loss_weights");
    reject_unknown(w, {"reconstruction", "alpha_regularization", "rigidity"}, "loss_weights");
    read(w, "reconstruction", c.loss_weights.reconstruction);
    read(w, "alpha_regularization", c.loss_weights.alpha_regularization);
    read(w, "rigidity", c.loss_weights.rigidity);
  }
  read(j, "mapping_hidden_width", c.mapping_hidden_width);
  read(j, "mapping_depth", c.mapping_depth);
  read(j, "mapping_encoding_bands", c.mapping_encoding_bands);
  read(j, "atlas_size", c.atlas_size);
  read(j, "grid_resolution", c.grid_resolution);
  read(j, "grid_learning_rate", c.grid_learning_rate);
  read(j, "batch_size", c.batch_size);
  read(j, "target_psnr", c.target_psnr);
  read(j, "alpha_margin", c.alpha_margin);
  read(j, "bootstrap_fraction", c.bootstrap_fraction);
  read(j, "bootstrap_weight", c.bootstrap_weight);
  read(j, "bootstrap_threshold", c.bootstrap_threshold);
  read(j, "uv_bound_weight", c.uv_bound_weight);
  c.validate();
  return c;
}

AppConfig parse_config(const Json& j) {
  AppConfig cfg;
  reject_unknown(j, {"nla", "pipeline", "defaults", "providers", "evaluate", "serve"}, "config");
  if (j.contains("nla")) cfg.nla = nla_config_from_json(j.at("nla"));
  if (j.contains("pipeline")) {
    const Json& p = j.at("pipeline");
    reject_unknown(p, {"schedule", "working_resolution", "crop_padding", "mask_dilation", "foreground_classes"},
                   "pipeline config");
    if (p.contains("schedule")) {
      const Json& s = p.at("schedule");
      reject_unknown(s, {"train_steps", "beta_start", "beta_end", "inference_steps"}, "schedule config");
      read(s, "train_steps", cfg.pipeline.schedule.train_steps);
      read(s, "beta_start", cfg.pipeline.schedule.beta_start);
      read(s, "beta_end", cfg.pipeline.schedule.beta_end);
      read(s, "inference_steps", cfg.pipeline.schedule.inference_steps);
    }
    read(p, "working_resolution", cfg.pipeline.working_resolution);
    read(p, "crop_padding", cfg.pipeline.crop_padding);
    read(p, "mask_dilation", cfg.pipeline.mask_dilation);
    read(p, "foreground_classes", cfg.pipeline.foreground_classes);
  }
  if (j.contains("defaults")) {
    const Json& d = j.at("defaults");
    reject_unknown(d, {"rho", "lambda_hed", "guidance_scale", "num_samples"}, "defaults");
    read(d, "rho", cfg.defaults.rho);
    read(d, "lambda_hed", cfg.defaults.lambda_hed);
    read(d, "guidance_scale", cfg.defaults.guidance_scale);
    read(d, "num_samples", cfg.defaults.num_samples);
  }
  if (j.contains("providers")) {
    const Json& p = j.at("providers");
    reject_unknown(p, {"seed", "label_rules", "edge_gain", "timeout_seconds", "pool_size"}, "providers config");
    read(p, "seed", cfg.providers.seed);
    read(p, "edge_gain", cfg.providers.edge_gain);
    read(p, "timeout_seconds", cfg.providers.timeout_seconds);
    read(p, "pool_size", cfg.providers.pool_size);
    if (p.contains("label_rules"))
      for (const auto& r : p.at("label_rules")) {
        reject_unknown(r, {"label", "color"}, "label rule");
        LabelRule rule;
        read(r, "label", rule.label);
        read(r, "color", rule.color);
        require(!rule.label.empty(), "label rule needs a label");
        cfg.providers.label_rules.push_back(rule);
      }
  }
  if (j.contains("evaluate")) {
    reject_unknown(j.at("evaluate"), {"psnr_peak"}, "evaluate config");
    read(j.at("evaluate"), "psnr_peak", cfg.psnr_peak);
  }
  if (j.contains("serve")) {
    reject_unknown(j.at("serve"), {"workers"}, "serve config");
    read(j.at("serve"), "workers", cfg.serve_workers);
  }
  cfg.validate();
  return cfg;
}

Json to_json(const AppConfig& c) {
  Json rules = Json::array();
  for (const auto& r : c.providers.label_rules) rules.push_back({{"label", r.label}, {"color", r.color}});
  const auto& s = c.pipeline.schedule;
  return Json{{"nla", to_json(c.nla)},
              {"pipeline",
               {{"schedule",
                 {{"train_steps", s.train_steps},
                  {"beta_start", s.beta_start},
                  {"beta_end", s.beta_end},
                  {"inference_steps", s.inference_steps}}},
                {"working_resolution", c.pipeline.working_resolution},
                {"crop_padding", c.pipeline.crop_padding},
                {"mask_dilation", c.pipeline.mask_dilation},
                {"foreground_classes", c.pipeline.foreground_classes}}},
              {"defaults",
               {{"rho", c.defaults.rho},
                {"lambda_hed", c.defaults.lambda_hed},
                {"guidance_scale", c.defaults.guidance_scale},
                {"num_samples", c.defaults.num_samples}}},
              {"providers",
               {{"seed", c.providers.seed},
                {"label_rules", rules},
                {"edge_gain", c.providers.edge_gain},
                {"timeout_seconds", c.providers.timeout_seconds},
                {"pool_size", c.providers.pool_size}}},
              {"evaluate", {{"psnr_peak", c.psnr_peak}}},
              {"serve", {{"workers", c.serve_workers}}}};
}

EditRequest parse_edit_request(const Json& j, const EditDefaults& defaults) {
  reject_unknown(j, {"source_tokens", "target_prompt", "rho", "lambda_hed", "seed", "guidance_scale", "use_mask",
                     "use_hed", "num_samples", "layer", "idempotency_key"},
                 "edit request");
  EditRequest r;
  r.rho = defaults.rho;
  r.lambda_hed = defaults.lambda_hed;
  r.guidance_scale = defaults.guidance_scale;
  r.num_samples = defaults.num_samples;
  if (j.contains("source_tokens") && j.at("source_tokens").is_string())
    r.source_tokens = {j.at("source_tokens").get<std::string>()};
  else
    read(j, "source_tokens", r.source_tokens);
  read(j, "target_prompt", r.target_prompt);
  read(j, "rho", r.rho);
  read(j, "lambda_hed", r.lambda_hed);
  read(j, "seed", r.seed);
  read(j, "guidance_scale", r.guidance_scale);
  read(j, "use_mask", r.use_mask);
  read(j, "use_hed", r.use_hed);
  read(j, "num_samples", r.num_samples);
  if (j.contains("layer") && !j.at("layer").is_null()) r.layer = parse_layer(j.at("layer").get<std::string>());
  r.validate();
  return r;
}

Json to_json(const EditRequest& r) {
  return Json{{"source_tokens", r.source_tokens},
              {"target_prompt", r.target_prompt},
              {"rho", r.rho},
              {"lambda_hed", r.lambda_hed},
              {"seed", r.seed},
              {"guidance_scale", r.guidance_scale},
              {"use_mask", r.use_mask},
              {"use_hed", r.use_hed},
              {"num_samples", r.num_samples},
              {"layer", r.layer ? Json(to_string(*r.layer)) : Json(nullptr)}};
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot read " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw InvalidArgument("invalid JSON in " + path.string() + ": " + e.what());
  }
}

AppConfig load_config(const std::filesystem::path& path) { return parse_config(read_json_file(path)); }

}  // namespace atlasedit
