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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dtrsum/evaluation.hpp"
#include "dtrsum/tensor.hpp"

namespace dtrsum {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Feature files.
//
// Layout (all integers little-endian):
//   bytes 0..3   magic "DTRF"
//   bytes 4..5   u16 version (1)
//   byte  6      u8 dtype (0 = float32)
//   byte  7      u8 reserved (0)
//   bytes 8..11  u32 T (frames)
//   bytes 12..15 u32 D (feature dimension)
//   then T * D float32 values, row-major.

inline constexpr std::size_t kFeatureHeaderBytes = 16;
inline constexpr std::uint16_t kFeatureVersion = 1;
inline constexpr std::uint8_t kFeatureDtypeFloat32 = 0;

struct FeatureHeader {
  std::uint32_t frames = 0;
  std::uint32_t dim = 0;
};

std::vector<std::uint8_t> EncodeFeatures(const Tensor& features);
// `source` names the data in error messages.
Tensor DecodeFeatures(std::span<const std::uint8_t> bytes,
                      const std::string& source = "<memory>");
void WriteFeatures(const fs::path& path, const Tensor& features);
Tensor LoadFeatures(const fs::path& path);
FeatureHeader ReadFeatureHeader(const fs::path& path);

// Rounds every entry to the nearest float32, i.e. what survives a
// write/load cycle.
Tensor RoundToStoredPrecision(const Tensor& features);

// ---------------------------------------------------------------------------
// Annotations: JSON documents
//   {"video_id": str, "num_frames": int, "keyframes": [int, ...],
//    "frame_scores": [float, ...]  (optional)}
// When "keyframes" is absent but "frame_scores" is present, the key frames
// are the top floor(0.15 T) frames by score (ties to the earlier frame).

struct AnnotationRecord {
  std::string video_id;
  std::size_t num_frames = 0;
  std::vector<std::size_t> keyframes;  // sorted, unique, < num_frames
  std::optional<std::vector<double>> frame_scores;
  bool binarized_from_scores = false;

  FrameMask KeyframeMask() const;
  // Binary ground-truth summary score per frame.
  std::vector<double> TargetScores() const;
};

AnnotationRecord ParseAnnotation(const std::string& text,
                                 const std::string& source = "<memory>");
std::string SerializeAnnotation(const AnnotationRecord& record);
AnnotationRecord LoadAnnotation(const fs::path& path);
void WriteAnnotation(const fs::path& path, const AnnotationRecord& record);

// ---------------------------------------------------------------------------
// Dataset manifests: JSON
//   {"format": "dtrsum-manifest", "version": 1,
//    "videos": [{"video_id", "num_frames", "feature_dim", "features",
//                "annotation", "binarized_from_scores"}],
//    "splits": {"train": [ids], "test": [ids]}}
// Paths are relative to the manifest's directory.

struct VideoEntry {
  std::string video_id;
  std::size_t num_frames = 0;
  std::size_t feature_dim = 0;
  fs::path features;
  fs::path annotation;
  bool binarized_from_scores = false;
};

struct DatasetManifest {
  std::vector<VideoEntry> videos;
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
  fs::path base_dir;

  fs::path Resolve(const fs::path& p) const {
    return p.is_absolute() ? p : base_dir / p;
  }
};

DatasetManifest LoadManifest(const fs::path& path);
void WriteManifest(const fs::path& path, const DatasetManifest& manifest);

struct SplitIds {
  std::vector<std::string> train;
  std::vector<std::string> test;
};

// Seeded shuffle; the first ceil(ratio * n) ids train, the rest test.
SplitIds SplitDataset(const std::vector<std::string>& ids, double ratio,
                      std::uint64_t seed);

struct Video {
  std::string id;
  Tensor features;  // T x D, promoted to double
  AnnotationRecord annotation;

  std::size_t frames() const { return features.rows(); }
};

enum class SplitKind { kTrain, kTest, kAll };

struct Dataset {
  std::vector<Video> videos;
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;

  const Video& Find(const std::string& id) const;
  std::vector<const Video*> Split(SplitKind kind) const;
  std::size_t feature_dim() const;
};

// Loads every feature file and annotation, rejecting any disagreement
// between manifest, feature header and annotation before returning.
Dataset LoadDataset(const DatasetManifest& manifest);
Dataset LoadDataset(const fs::path& manifest_path);

SplitKind ParseSplitKind(const std::string& name);

// Whole-file helpers that raise IoError with the path on failure.
std::vector<std::uint8_t> ReadFileBytes(const fs::path& path);
void WriteFileBytes(const fs::path& path, std::span<const std::uint8_t> bytes);
std::string ReadTextFile(const fs::path& path);
void WriteTextFile(const fs::path& path, const std::string& text);

}  // namespace dtrsum
