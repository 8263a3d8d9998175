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


#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "atlasedit/cli.hpp"
#include "atlasedit/metrics.hpp"
#include "atlasedit/stubs.hpp"

namespace py = pybind11;
using namespace atlasedit;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

Image to_image(const FloatArray& a) {
  if (a.ndim() != 2 && a.ndim() != 3) throw InvalidArgument("image arrays must be HxW or HxWxC");
  const int h = static_cast<int>(a.shape(0)), w = static_cast<int>(a.shape(1));
  const int c = a.ndim() == 3 ? static_cast<int>(a.shape(2)) : 1;
  Image img(w, h, c);
  std::copy(a.data(), a.data() + a.size(), img.data().begin());
  return img;
}

FloatArray to_array(const Image& img) {
  FloatArray out({img.height(), img.width(), img.channels()});
  std::copy(img.data().begin(), img.data().end(), out.mutable_data());
  return out;
}

FloatArray to_array(const std::vector<float>& v, std::vector<py::ssize_t> shape) {
  FloatArray out(shape);
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

CommonOptions common(std::optional<std::filesystem::path> config, std::string providers,
                     std::optional<std::uint64_t> seed, std::filesystem::path out) {
  CommonOptions o;
  o.config = std::move(config);
  o.providers = std::move(providers);
  o.seed = seed;
  o.out = std::move(out);
  return o;
}

}  // namespace

PYBIND11_MODULE(_atlasedit, m) {
  m.doc() = "Layered-atlas video editing: decomposition, text-driven atlas edits and edit metrics.";

  // Translators run newest first, so register bases before subclasses.
  const auto& error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  const auto& domain = py::register_exception<DomainError>(m, "DomainError", error.ptr());
  py::register_exception<ProviderError>(m, "ProviderError", error.ptr());
  py::register_exception<NotFound>(m, "NotFound", domain.ptr());

  m.def("psnr", [](const FloatArray& a, const FloatArray& b, double peak) { return psnr(to_image(a), to_image(b), peak); },
        py::arg("a"), py::arg("b"), py::arg("peak") = 1.0, "PSNR in dB between two HxWxC images in [0, peak].");
  m.def("haarpsi", [](const FloatArray& a, const FloatArray& b) { return haarpsi(to_image(a), to_image(b)); },
        py::arg("a"), py::arg("b"), "HaarPSI similarity of two images in [0, 1].");
  m.def("lpips",
        [](const FloatArray& a, const FloatArray& b, std::uint64_t seed) {
          return lpips(to_image(a), to_image(b), RandomConvFeatures(seed));
        },
        py::arg("a"), py::arg("b"), py::arg("seed") = 0, "Perceptual distance under the stub feature extractor.");
  m.def("clip_score", &clip_score, py::arg("image_embedding"), py::arg("text_embedding"));

  m.def("load_atlas",
        [](const std::filesystem::path& path) {
          const AtlasContainer c = load_atlas(path);
          const AtlasSet& a = c.atlas;
          const py::ssize_t f = a.frames, h = a.height, w = a.width;
          py::dict d;
          d["fg_rgba"] = to_array(a.fg_rgba);
          d["bg_rgba"] = to_array(a.bg_rgba);
          d["uv_fg"] = to_array(a.uv_fg, {f, h, w, 2});
          d["uv_bg"] = to_array(a.uv_bg, {f, h, w, 2});
          d["alpha"] = to_array(a.alpha, {f, h, w});
          d["psnr"] = a.report.psnr;
          d["converged"] = a.report.converged;
          d["seed"] = a.seed;
          d["source_frames"] = c.source_frames ? py::cast(c.source_frames->string()) : py::none();
          return d;
        },
        py::arg("path"), "Reads an atlas container (directory, atlas.npz or atlas.json) into numpy arrays.");

  m.def("reconstruct",
        [](const std::filesystem::path& path) {
          py::list frames;
          for (const Image& f : reconstruct_video(load_atlas(path).atlas).frames) frames.append(to_array(f));
          return frames;
        },
        py::arg("path"), "Frames recomposited from an atlas container.");

  m.def("decompose",
        [](const std::filesystem::path& frames, const std::filesystem::path& out,
           std::optional<std::filesystem::path> config, std::optional<std::uint64_t> seed, std::string providers) {
          py::gil_scoped_release release;
          return cmd_decompose(frames, common(std::move(config), std::move(providers), seed, out)).atlas.report.psnr;
        },
        py::arg("frames"), py::arg("out"), py::arg("config") = py::none(), py::arg("seed") = py::none(),
        py::arg("providers") = "stub", "Fits an atlas to a frames directory; returns the reconstruction PSNR.");

  m.def("edit",
        [](const std::filesystem::path& atlas, const std::filesystem::path& request, const std::filesystem::path& out,
           std::optional<int> samples, bool no_mask, bool no_hed, std::optional<std::filesystem::path> config,
           std::optional<std::uint64_t> seed, std::string providers) {
          EditOptions e{request, samples, no_mask, no_hed};
          std::string manifest;
          {
            py::gil_scoped_release release;
            manifest = cmd_edit(atlas, e, common(std::move(config), std::move(providers), seed, out)).manifest.dump();
          }
          return py::module_::import("json").attr("loads")(manifest);
        },
        py::arg("atlas"), py::arg("request"), py::arg("out"), py::arg("samples") = py::none(),
        py::arg("no_mask") = false, py::arg("no_hed") = false, py::arg("config") = py::none(),
        py::arg("seed") = py::none(), py::arg("providers") = "stub",
        "Edits an atlas with a request JSON file; returns the edit manifest.");

  m.def("evaluate",
        [](const std::filesystem::path& pairs, const std::filesystem::path& out,
           std::optional<std::filesystem::path> config, std::string providers) {
          std::string report;
          {
            py::gil_scoped_release release;
            report = to_json(cmd_evaluate(pairs, common(std::move(config), std::move(providers), std::nullopt, out)).report).dump();
          }
          return py::module_::import("json").attr("loads")(report);
        },
        py::arg("pairs"), py::arg("out"), py::arg("config") = py::none(), py::arg("providers") = "stub",
        "Scores the pairs listed in a JSON spec; returns the metrics report.");
}
