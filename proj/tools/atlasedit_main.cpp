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


#include <CLI11.hpp>

#include <csignal>
#include <iostream>

#include "atlasedit/cli.hpp"
#include "atlasedit/studio.hpp"

namespace {

using atlasedit::CommonOptions;
using atlasedit::ExitCode;

void add_common(CLI::App* cmd, CommonOptions& o, std::uint64_t& seed) {
  cmd->add_option("--config", o.config, "JSON configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--providers", o.providers, "provider backend")->check(CLI::IsMember({"stub", "remote"}));
  cmd->add_option("--seed", seed, "seed for every random stream");
  cmd->add_option("--out", o.out, "output directory");
}

int serve(const std::filesystem::path& project, int port, const std::string& host, const CommonOptions& o) {
  // Block termination signals before any thread starts so only sigwait sees them.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  const auto config = atlasedit::resolve_config(o);
  atlasedit::StudioServer server(project, config, atlasedit::build_providers(o.providers, config));
  const int bound = server.start(host, port);
  std::cout << "serving " << project.string() << " on http://" << host << ":" << bound << std::endl;
  int sig = 0;
  sigwait(&set, &sig);
  server.stop();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Layered-atlas video editing toolkit"};
  app.require_subcommand(1);
  CommonOptions common;
  std::uint64_t seed = 0;

  auto* decompose = app.add_subcommand("decompose", "fit a layered atlas to a frames directory");
  std::filesystem::path frames;
  decompose->add_option("frames", frames, "directory of numbered PNG frames")->required();
  add_common(decompose, common, seed);

  auto* edit = app.add_subcommand("edit", "edit an atlas with a text request");
  std::filesystem::path atlas;
  atlasedit::EditOptions edit_opts;
  int samples = 0;
  edit->add_option("atlas", atlas, "atlas container (directory, atlas.npz or atlas.json)")->required();
  edit->add_option("--request", edit_opts.request, "edit request JSON")->required()->check(CLI::ExistingFile);
  edit->add_option("--samples", samples, "number of diverse samples")->check(CLI::PositiveNumber);
  edit->add_flag("--no-mask", edit_opts.no_mask, "disable mask guidance");
  edit->add_flag("--no-hed", edit_opts.no_hed, "disable edge conditioning");
  add_common(edit, common, seed);

  auto* evaluate = app.add_subcommand("evaluate", "score source/edited video pairs");
  std::filesystem::path pairs;
  evaluate->add_option("pairs", pairs, "pairs spec JSON")->required()->check(CLI::ExistingFile);
  add_common(evaluate, common, seed);

  auto* sweep = app.add_subcommand("sweep", "run an edit over a rho/lambda grid");
  std::filesystem::path sweep_atlas, sweep_request, grid;
  sweep->add_option("atlas", sweep_atlas, "atlas container")->required();
  sweep->add_option("--request", sweep_request, "edit request JSON")->required()->check(CLI::ExistingFile);
  sweep->add_option("--grid", grid, "grid spec JSON")->required()->check(CLI::ExistingFile);
  add_common(sweep, common, seed);

  auto* serve_cmd = app.add_subcommand("serve", "serve the studio API over a project directory");
  std::filesystem::path project;
  int port = 8080;
  std::string host = "127.0.0.1";
  serve_cmd->add_option("project", project, "project directory written by decompose")->required();
  serve_cmd->add_option("--port", port, "TCP port");
  serve_cmd->add_option("--host", host, "bind address");
  add_common(serve_cmd, common, seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ExitCode::kUsage);
  }

  for (auto* cmd : {decompose, edit, evaluate, sweep, serve_cmd})
    if (cmd->parsed() && cmd->count("--seed")) common.seed = seed;

  try {
    if (decompose->parsed()) {
      const auto r = atlasedit::cmd_decompose(frames, common);
      std::cout << "atlas written to " << r.container.string() << " (PSNR " << r.atlas.report.psnr << " dB)\n";
    } else if (edit->parsed()) {
      if (samples > 0) edit_opts.samples = samples;
      const auto r = atlasedit::cmd_edit(atlas, edit_opts, common);
      std::cout << r.result.samples.size() << " edited sample(s) written to " << common.out.string() << "\n";
    } else if (evaluate->parsed()) {
      atlasedit::cmd_evaluate(pairs, common);
      std::cout << "metrics written to " << (common.out / "metrics.json").string() << "\n";
    } else if (sweep->parsed()) {
      const auto points = atlasedit::cmd_sweep(sweep_atlas, sweep_request, grid, common);
      for (const auto& p : points)
        std::cout << "rho=" << p.rho << " lambda=" << p.lambda << " divergence=" << p.divergence << "\n";
    } else if (serve_cmd->parsed()) {
      return serve(project, port, host, common);
    }
  } catch (const atlasedit::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.exit_code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::kUsage);
  }
  return 0;
}
