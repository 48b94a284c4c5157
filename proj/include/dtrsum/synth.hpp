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
#include <string>
#include <vector>

#include "dtrsum/io.hpp"
#include "dtrsum/rng.hpp"

namespace dtrsum {

// Piecewise-stationary synthetic videos. Each video is a run of contiguous
// blocks; frames of block k are mu_k plus isotropic Gaussian noise. Some
// blocks are "key": their centre frame is a planted key frame and their
// mean carries +salience on coordinate 0 (-salience for the others), so
// key-ness is learnable from appearance.
struct SyntheticSpec {
  std::size_t videos = 8;
  std::size_t min_frames = 150;
  std::size_t max_frames = 250;
  std::size_t feature_dim = 16;
  std::size_t segments = 12;
  // Upper bound on the fraction of blocks marked key. Key blocks are also
  // chosen so their total length fits the summary budget.
  double key_fraction = 0.2;
  // Minimum pairwise distance between block means.
  double separation = 1.5;
  double noise = 0.1;
  double salience = 1.5;
  double budget_fraction = 0.15;
  double train_ratio = 0.8;
  std::uint64_t seed = 7;

  void Validate() const;
};

SyntheticSpec ParseSyntheticSpec(const std::string& json_text,
                                 const std::string& source = "<memory>");
std::string SerializeSyntheticSpec(const SyntheticSpec& spec);

struct SyntheticVideo {
  std::string id;
  Tensor features;                  // stored precision (float32 values)
  std::vector<std::size_t> bounds;  // block bounds {0, ..., T}
  std::vector<std::size_t> key_blocks;
  std::vector<std::size_t> keyframes;
  std::vector<std::vector<double>> means;

  AnnotationRecord Annotation() const;
};

// Video `index` of the corpus described by `spec`; independent of the
// other videos' draws.
SyntheticVideo GenerateSyntheticVideo(const SyntheticSpec& spec, std::size_t index);
std::vector<SyntheticVideo> GenerateSyntheticCorpus(const SyntheticSpec& spec);

// In-memory dataset with the same split SynthDataset would write.
Dataset SyntheticDataset(const SyntheticSpec& spec);

// Writes features/<id>.dtrf, annotations/<id>.json and manifest.json
// under `out_dir` and returns the manifest.
DatasetManifest SynthDataset(const SyntheticSpec& spec,
                             const std::filesystem::path& out_dir);

}  // namespace dtrsum
