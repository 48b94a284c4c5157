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

#include "dtrsum/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace dtrsum {

double RelativeError(double analytic, double numeric) {
  const double scale =
      std::max({1.0, std::abs(analytic), std::abs(numeric)});
  return std::abs(analytic - numeric) / scale;
}

namespace {

double EvalLoss(const LossBuilder& build) {
  ad::Graph graph(/*grad_enabled=*/false);
  return build(graph).value().item();
}

std::vector<std::size_t> ProbeIndices(std::size_t size, std::size_t limit) {
  std::vector<std::size_t> idx;
  if (limit == 0 || size <= limit) {
    idx.resize(size);
    for (std::size_t i = 0; i < size; ++i) idx[i] = i;
    return idx;
  }
  idx.reserve(limit);
  for (std::size_t k = 0; k < limit; ++k) {
    idx.push_back(k * (size - 1) / (limit - 1));
  }
  return idx;
}

}  // namespace

GradCheckReport GradCheck(const LossBuilder& build, const ParamRefs& params,
                          const GradCheckOptions& options) {
  if (!(options.step >= 1e-7 && options.step <= 1e-3)) {
    throw ValidationError("gradient check step must lie in [1e-7, 1e-3]");
  }
  for (Parameter* p : params) p->ZeroGrad();

  ad::Graph graph;
  graph.Train(params);
  ad::Var loss = build(graph);
  if (graph.stochastic()) {
    throw ValidationError(
        "gradient check requires a deterministic graph (disable dropout)");
  }
  graph.Backward(loss);

  GradCheckReport report;
  for (Parameter* p : params) {
    ParamCheck check;
    check.name = p->name;
    check.total_entries = p->value.size();
    const Tensor analytic = p->grad;
    for (std::size_t i : ProbeIndices(p->value.size(),
                                      options.max_entries_per_param)) {
      const double original = p->value[i];
      p->value[i] = original + options.step;
      const double plus = EvalLoss(build);
      p->value[i] = original - options.step;
      const double minus = EvalLoss(build);
      p->value[i] = original;
      const double numeric = (plus - minus) / (2.0 * options.step);
      check.max_rel_error =
          std::max(check.max_rel_error, RelativeError(analytic[i], numeric));
      ++check.entries_checked;
    }
    check.passed = check.max_rel_error < options.tolerance;
    report.max_rel_error = std::max(report.max_rel_error, check.max_rel_error);
    report.passed = report.passed && check.passed;
    report.params.push_back(std::move(check));
  }
  for (Parameter* p : params) p->ZeroGrad();
  return report;
}

}  // namespace dtrsum
