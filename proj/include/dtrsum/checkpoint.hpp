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
#include <filesystem>
#include <span>
#include <vector>

#include "dtrsum/discriminator.hpp"
#include "dtrsum/generator.hpp"
#include "dtrsum/model_config.hpp"

namespace dtrsum {

enum class InitScheme { kRandom, kZero };

// Generator + discriminator pair together with the hyperparameters that
// go into a checkpoint.
struct ModelBundle {
  ModelConfig config;
  double tau = 0.5;
  Generator generator;
  Discriminator discriminator;

  static ModelBundle Create(const ModelConfig& config, std::uint64_t seed,
                            InitScheme init = InitScheme::kRandom);

  // Every tensor stored in a checkpoint: learnable parameters followed by
  // batch-norm running statistics.
  ParamRefs Tensors();
};

// Checkpoint container (little-endian):
//   bytes 0..3   magic "DTRC"
//   bytes 4..7   u32 version (1)
//   bytes 8..15  u64 manifest length N
//   N bytes      JSON manifest: hyperparameters and, per tensor, name,
//                shape, kind and byte offset into the payload
//   payload      float64 values of every tensor, row-major, contiguous
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::vector<std::uint8_t> EncodeCheckpoint(ModelBundle& bundle);
// Throws FormatError(kHyperparameterMismatch) when `expected` is given and
// disagrees with the stored hyperparameters.
ModelBundle DecodeCheckpoint(std::span<const std::uint8_t> bytes,
                             const ModelConfig* expected = nullptr,
                             const std::string& source = "<memory>");

void SaveCheckpoint(const std::filesystem::path& path, ModelBundle& bundle);
ModelBundle LoadCheckpoint(const std::filesystem::path& path,
                           const ModelConfig* expected = nullptr);

}  // namespace dtrsum
