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
#include <string>
#include <vector>

#include "dtrsum/gradcheck.hpp"
#include "dtrsum/model_config.hpp"

namespace dtrsum {

struct ToyDims {
  std::size_t feature_dim = 4;  // D
  std::size_t hidden = 4;       // H
  std::size_t encoded_dim = 4;  // D_e
  std::size_t disc_hidden = 4;  // H_d
  std::size_t frames = 6;       // T
};

// Parses "D=4,H=4,De=4,T=6,Hd=4"; omitted keys keep their defaults.
ToyDims ParseToyDims(const std::string& text);

struct LossCheck {
  std::string loss;
  GradCheckReport report;
};

struct ModelGradCheck {
  std::vector<LossCheck> losses;
  bool passed = true;
};

// Finite-difference check of every generator and discriminator parameter
// through the discriminator, adversarial, supervised and total losses.
// Batch normalisation runs in training mode; dropout is disabled so the
// graph is deterministic.
ModelGradCheck CheckModelGradients(const ToyDims& dims, const HoleSet& holes,
                                   const GradCheckOptions& options,
                                   std::uint64_t seed = 3);

}  // namespace dtrsum
