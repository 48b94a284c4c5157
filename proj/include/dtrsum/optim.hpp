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

#include <cstdint>
#include <span>
#include <vector>

#include "dtrsum/tensor.hpp"

namespace dtrsum {

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam with bias correction. Holds first/second moments for a fixed,
// ordered parameter list; Step() consumes and zeroes the gradients.
class Adam {
 public:
  Adam(ParamRefs params, AdamOptions options);

  void Step();
  void Step(double learning_rate);

  std::uint64_t step_count() const { return step_; }
  const AdamOptions& options() const { return options_; }
  const ParamRefs& params() const { return params_; }
  const std::vector<Tensor>& first_moments() const { return m_; }
  const std::vector<Tensor>& second_moments() const { return v_; }

 private:
  ParamRefs params_;
  AdamOptions options_;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
  std::uint64_t step_ = 0;
};

// Sum of squared gradient entries across `params`.
double GradNormSquared(std::span<Parameter* const> params);
// Rescales all gradients so their global L2 norm is at most max_norm.
// Returns the norm before clipping.
double ClipGradNorm(std::span<Parameter* const> params, double max_norm);

}  // namespace dtrsum
