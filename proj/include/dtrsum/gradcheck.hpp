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

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "dtrsum/autodiff.hpp"

namespace dtrsum {

// Builds a scalar loss on a fresh graph. Must be deterministic: the same
// parameter values have to yield the same loss on every call.
using LossBuilder = std::function<ad::Var(ad::Graph&)>;

struct GradCheckOptions {
  double step = 1e-5;
  double tolerance = 1e-4;
  // Upper bound on entries probed per parameter tensor (evenly spaced);
  // 0 probes every entry.
  std::size_t max_entries_per_param = 0;
};

struct ParamCheck {
  std::string name;
  std::size_t entries_checked = 0;
  std::size_t total_entries = 0;
  double max_rel_error = 0.0;
  bool passed = true;
};

struct GradCheckReport {
  std::vector<ParamCheck> params;
  double max_rel_error = 0.0;
  bool passed = true;
};

// |a - n| / max(1, |a|, |n|)
double RelativeError(double analytic, double numeric);

// Compares reverse-mode gradients of `build` against central differences
// for every parameter in `params`. Gradients of `params` are zeroed on exit.
// Throws ValidationError for a step outside [1e-7, 1e-3] or when the graph
// samples randomness (dropout in training mode).
GradCheckReport GradCheck(const LossBuilder& build, const ParamRefs& params,
                          const GradCheckOptions& options = {});

}  // namespace dtrsum
