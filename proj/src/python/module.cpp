// Copyright 2026 The dtrsum Authors
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

#include <sstream>

#include "cli.hpp"
#include "dtrsum/checkpoint.hpp"
#include "dtrsum/evaluation.hpp"
#include "dtrsum/io.hpp"
#include "dtrsum/layers.hpp"
#include "dtrsum/synth.hpp"

namespace py = pybind11;
using namespace dtrsum;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Tensor ToTensor(const Array& a) {
  if (a.ndim() != 2) throw ShapeError("expected a 2-d array");
  const auto rows = static_cast<std::size_t>(a.shape(0));
  const auto cols = static_cast<std::size_t>(a.shape(1));
  return Tensor({rows, cols}, std::vector<double>(a.data(), a.data() + rows * cols));
}

Array ToArray(const Tensor& t) {
  Array out({t.rows(), t.cols()});
  std::copy(t.values().begin(), t.values().end(), out.mutable_data());
  return out;
}

FrameMask ToMask(const std::vector<int>& v) {
  FrameMask m(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) m[i] = v[i] != 0;
  return m;
}

EvalConfig MakeEvalConfig(double budget, std::size_t max_segments, double penalty) {
  EvalConfig c;
  c.budget_fraction = budget;
  c.kts_max_segments = max_segments;
  c.kts_penalty = penalty;
  return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of dtrsum";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  m.def("time_span", &TimeSpan, py::arg("hole"));
  m.def("receptive_field", &ReceptiveField, py::arg("hole"), py::arg("kernel"),
        py::arg("layer"));

  m.def(
      "knapsack_select",
      [](const std::vector<double>& values, const std::vector<std::size_t>& weights,
         std::size_t capacity) { return KnapsackSelect(values, weights, capacity); },
      py::arg("values"), py::arg("weights"), py::arg("capacity"));
  m.def("budget_frames", &BudgetFrames, py::arg("frames"), py::arg("fraction"));
  m.def(
      "kts_segment",
      [](const Array& features, std::size_t max_segments, double penalty) {
        return KtsSegment(ToTensor(features), max_segments, penalty).bounds();
      },
      py::arg("features"), py::arg("max_segments"), py::arg("penalty"));
  m.def(
      "precision_recall",
      [](const std::vector<int>& generated, const std::vector<int>& reference) {
        const Overlap o = PrecisionRecall(ToMask(generated), ToMask(reference));
        return py::make_tuple(o.precision, o.recall);
      },
      py::arg("generated"), py::arg("reference"));
  m.def("f_measure", &FMeasure, py::arg("precision"), py::arg("recall"));
  m.def(
      "evaluate_video",
      [](const std::vector<double>& scores, const std::vector<int>& keyframes,
         const Array& features, double budget, std::size_t max_segments, double penalty) {
        const EvalResult r = EvaluateVideo(scores, ToMask(keyframes), ToTensor(features),
                                           MakeEvalConfig(budget, max_segments, penalty));
        py::dict d;
        d["precision"] = r.precision;
        d["recall"] = r.recall;
        d["f_measure"] = r.f_measure;
        d["bounds"] = r.segmentation.bounds();
        d["selected"] = std::vector<int>(r.generated.mask.begin(), r.generated.mask.end());
        return d;
      },
      py::arg("scores"), py::arg("keyframes"), py::arg("features"), py::arg("budget") = 0.15,
      py::arg("max_segments") = 0, py::arg("penalty") = -1.0);

  m.def(
      "load_features", [](const fs::path& path) { return ToArray(LoadFeatures(path)); },
      py::arg("path"));
  m.def(
      "write_features",
      [](const fs::path& path, const Array& features) {
        WriteFeatures(path, ToTensor(features));
      },
      py::arg("path"), py::arg("features"));
  m.def(
      "load_annotation",
      [](const fs::path& path) {
        const AnnotationRecord r = LoadAnnotation(path);
        py::dict d;
        d["video_id"] = r.video_id;
        d["num_frames"] = r.num_frames;
        d["keyframes"] = r.keyframes;
        return d;
      },
      py::arg("path"));
  m.def(
      "synth",
      [](const fs::path& out_dir, const std::string& spec_json) {
        SynthDataset(ParseSyntheticSpec(spec_json), out_dir);
        return out_dir / "manifest.json";
      },
      py::arg("out_dir"), py::arg("spec_json") = "{}");

  m.def(
      "infer",
      [](const fs::path& checkpoint, const Array& features) {
        const ModelBundle model = LoadCheckpoint(checkpoint);
        return model.generator.Infer(ToTensor(features));
      },
      py::arg("checkpoint"), py::arg("features"));

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = tools::RunCli(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}
