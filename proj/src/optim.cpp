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

#include "dtrsum/optim.hpp"

#include <cmath>

namespace dtrsum {

Adam::Adam(ParamRefs params, AdamOptions options)
    : params_(std::move(params)), options_(options) {
  if (!(options_.learning_rate > 0.0)) {
    throw ValidationError("learning rate must be positive");
  }
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const Parameter* p : params_) {
    m_.emplace_back(p->value.shape(), 0.0);
    v_.emplace_back(p->value.shape(), 0.0);
  }
}

void Adam::Step() { Step(options_.learning_rate); }

void Adam::Step(double learning_rate) {
  for (const Parameter* p : params_) {
    if (!p->grad.SameShape(p->value)) {
      throw ValidationError("missing gradient for parameter " + p->name);
    }
  }
  ++step_;
  const double b1 = options_.beta1, b2 = options_.beta2;
  const double t = static_cast<double>(step_);
  const double correction1 = 1.0 - std::pow(b1, t);
  const double correction2 = 1.0 - std::pow(b2, t);
  for (std::size_t k = 0; k < params_.size(); ++k) {
    Parameter& p = *params_[k];
    Tensor& m = m_[k];
    Tensor& v = v_[k];
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i];
      m[i] = b1 * m[i] + (1.0 - b1) * g;
      v[i] = b2 * v[i] + (1.0 - b2) * g * g;
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      p.value[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + options_.epsilon);
    }
    p.ZeroGrad();
  }
}

double GradNormSquared(std::span<Parameter* const> params) {
  double acc = 0.0;
  for (const Parameter* p : params) {
    for (double g : p->grad.values()) acc += g * g;
  }
  return acc;
}

double ClipGradNorm(std::span<Parameter* const> params, double max_norm) {
  const double norm = std::sqrt(GradNormSquared(params));
  if (max_norm > 0.0 && norm > max_norm) {
    const double factor = max_norm / norm;
    for (Parameter* p : params) {
      for (double& g : p->grad.values()) g *= factor;
    }
  }
  return norm;
}

}  // namespace dtrsum
