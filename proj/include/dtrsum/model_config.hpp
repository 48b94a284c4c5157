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

#include <cstddef>
#include <vector>

#include "dtrsum/layers.hpp"

namespace dtrsum {

// Architecture hyperparameters shared by the generator, the discriminator
// and the checkpoint manifest. Defaults are desk scale; the original
// full-scale setting is feature_dim 2048, hidden 1024, encoded_dim 2048,
// disc_hidden 256.
struct ModelConfig {
  std::size_t feature_dim = 16;
  std::size_t hidden = 16;
  std::size_t encoded_dim = 16;
  std::size_t disc_hidden = 8;
  HoleSet holes = kDefaultHoles;
  std::vector<std::size_t> head_widths{512, 256, 128};
  double dropout = 0.5;

  void Validate() const;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

}  // namespace dtrsum
