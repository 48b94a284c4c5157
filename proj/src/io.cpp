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

#include "dtrsum/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <numeric>
#include <set>
#include <unordered_map>

#include "dtrsum/rng.hpp"
#include "json.hpp"

namespace dtrsum {

using json = nlohmann::json;

namespace {

void PutU16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void PutU32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint16_t GetU16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t GetU32(const std::uint8_t* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}

constexpr char kFeatureMagic[4] = {'D', 'T', 'R', 'F'};

}  // namespace

std::vector<std::uint8_t> ReadFileBytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed for " + path.string());
  return bytes;
}

void WriteFileBytes(const fs::path& path, std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

std::string ReadTextFile(const fs::path& path) {
  const auto bytes = ReadFileBytes(path);
  return std::string(bytes.begin(), bytes.end());
}

void WriteTextFile(const fs::path& path, const std::string& text) {
  WriteFileBytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()),
                                 text.size()));
}

// ---------------------------------------------------------------------------
// Features

Tensor RoundToStoredPrecision(const Tensor& features) {
  Tensor out = features;
  for (double& v : out.values()) v = static_cast<double>(static_cast<float>(v));
  return out;
}

std::vector<std::uint8_t> EncodeFeatures(const Tensor& features) {
  if (features.rank() != 2 || features.rows() == 0 || features.cols() == 0) {
    throw ValidationError("feature matrix must be a non-empty T x D matrix");
  }
  constexpr auto kMax = std::numeric_limits<std::uint32_t>::max();
  if (features.rows() > kMax || features.cols() > kMax) {
    throw FormatError(FormatErrorKind::kOverflow,
                      "feature matrix " + ShapeString(features.shape()) +
                          " exceeds the 32-bit header fields");
  }
  std::vector<std::uint8_t> out;
  out.reserve(kFeatureHeaderBytes + 4 * features.size());
  out.insert(out.end(), std::begin(kFeatureMagic), std::end(kFeatureMagic));
  PutU16(out, kFeatureVersion);
  out.push_back(kFeatureDtypeFloat32);
  out.push_back(0);
  PutU32(out, static_cast<std::uint32_t>(features.rows()));
  PutU32(out, static_cast<std::uint32_t>(features.cols()));
  for (double v : features.values()) {
    PutU32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  }
  return out;
}

namespace {

FeatureHeader DecodeFeatureHeader(std::span<const std::uint8_t> bytes,
                                  const std::string& source) {
  if (bytes.size() < kFeatureHeaderBytes) {
    throw FormatError(FormatErrorKind::kTruncated,
                      source + ": truncated header (" +
                          std::to_string(bytes.size()) + " of " +
                          std::to_string(kFeatureHeaderBytes) + " bytes)");
  }
  if (std::memcmp(bytes.data(), kFeatureMagic, 4) != 0) {
    throw FormatError(FormatErrorKind::kBadMagic,
                      source + ": bad magic, not a DTRF feature file");
  }
  const std::uint16_t version = GetU16(bytes.data() + 4);
  if (version != kFeatureVersion) {
    throw FormatError(FormatErrorKind::kVersionMismatch,
                      source + ": unsupported feature file version " +
                          std::to_string(version));
  }
  if (bytes[6] != kFeatureDtypeFloat32) {
    throw FormatError(FormatErrorKind::kUnsupportedDtype,
                      source + ": unsupported dtype code " +
                          std::to_string(bytes[6]));
  }
  FeatureHeader h{GetU32(bytes.data() + 8), GetU32(bytes.data() + 12)};
  if (h.frames == 0 || h.dim == 0) {
    throw FormatError(FormatErrorKind::kMalformed,
                      source + ": header declares an empty matrix");
  }
  return h;
}

}  // namespace

Tensor DecodeFeatures(std::span<const std::uint8_t> bytes,
                      const std::string& source) {
  const FeatureHeader h = DecodeFeatureHeader(bytes, source);
  const std::uint64_t count = static_cast<std::uint64_t>(h.frames) * h.dim;
  if (count > (std::numeric_limits<std::size_t>::max() - kFeatureHeaderBytes) / 4) {
    throw FormatError(FormatErrorKind::kOverflow,
                      source + ": T x D = " + std::to_string(h.frames) + " x " +
                          std::to_string(h.dim) + " overflows");
  }
  const std::size_t expected = kFeatureHeaderBytes + 4 * static_cast<std::size_t>(count);
  if (bytes.size() < expected) {
    throw FormatError(FormatErrorKind::kTruncated,
                      source + ": truncated payload, expected " +
                          std::to_string(expected) + " bytes, got " +
                          std::to_string(bytes.size()));
  }
  if (bytes.size() > expected) {
    throw FormatError(FormatErrorKind::kMalformed,
                      source + ": " + std::to_string(bytes.size() - expected) +
                          " trailing bytes after payload");
  }
  Tensor out = Tensor::Matrix(h.frames, h.dim);
  const std::uint8_t* p = bytes.data() + kFeatureHeaderBytes;
  for (std::size_t i = 0; i < out.size(); ++i, p += 4) {
    const float v = std::bit_cast<float>(GetU32(p));
    if (!std::isfinite(v)) {
      throw FormatError(FormatErrorKind::kMalformed,
                        source + ": non-finite value at index " + std::to_string(i));
    }
    out[i] = v;
  }
  return out;
}

void WriteFeatures(const fs::path& path, const Tensor& features) {
  WriteFileBytes(path, EncodeFeatures(features));
}

Tensor LoadFeatures(const fs::path& path) {
  return DecodeFeatures(ReadFileBytes(path), path.string());
}

FeatureHeader ReadFeatureHeader(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  std::uint8_t buf[kFeatureHeaderBytes] = {};
  in.read(reinterpret_cast<char*>(buf), sizeof(buf));
  return DecodeFeatureHeader(std::span(buf, static_cast<std::size_t>(in.gcount())),
                             path.string());
}

// ---------------------------------------------------------------------------
// Annotations

FrameMask AnnotationRecord::KeyframeMask() const {
  FrameMask mask(num_frames, 0);
  for (std::size_t k : keyframes) mask[k] = 1;
  return mask;
}

std::vector<double> AnnotationRecord::TargetScores() const {
  std::vector<double> s(num_frames, 0.0);
  for (std::size_t k : keyframes) s[k] = 1.0;
  return s;
}

namespace {

[[noreturn]] void Malformed(const std::string& source, const std::string& what) {
  throw FormatError(FormatErrorKind::kMalformed, source + ": " + what);
}

json ParseJson(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    Malformed(source, std::string("invalid JSON: ") + e.what());
  }
}

const json& Field(const json& doc, const char* key, const std::string& source) {
  if (!doc.is_object() || !doc.contains(key)) {
    Malformed(source, std::string("missing field '") + key + "'");
  }
  return doc.at(key);
}

std::size_t SizeField(const json& doc, const char* key, const std::string& source) {
  const json& v = Field(doc, key, source);
  if (!v.is_number_unsigned()) {
    Malformed(source, std::string("field '") + key + "' must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

std::string StringField(const json& doc, const char* key, const std::string& source) {
  const json& v = Field(doc, key, source);
  if (!v.is_string()) Malformed(source, std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

}  // namespace

AnnotationRecord ParseAnnotation(const std::string& text, const std::string& source) {
  const json doc = ParseJson(text, source);
  AnnotationRecord rec;
  rec.video_id = StringField(doc, "video_id", source);
  rec.num_frames = SizeField(doc, "num_frames", source);
  if (rec.num_frames == 0) Malformed(source, "num_frames must be >= 1");

  if (doc.contains("frame_scores")) {
    const json& arr = doc.at("frame_scores");
    if (!arr.is_array()) Malformed(source, "frame_scores must be an array");
    std::vector<double> scores;
    for (const json& v : arr) {
      if (!v.is_number()) Malformed(source, "frame_scores entries must be numbers");
      const double s = v.get<double>();
      if (!(s >= 0.0 && s <= 1.0)) Malformed(source, "frame_scores must lie in [0, 1]");
      scores.push_back(s);
    }
    if (scores.size() != rec.num_frames) {
      Malformed(source, "frame_scores has " + std::to_string(scores.size()) +
                            " entries for " + std::to_string(rec.num_frames) + " frames");
    }
    rec.frame_scores = std::move(scores);
  }

  if (doc.contains("keyframes")) {
    const json& arr = doc.at("keyframes");
    if (!arr.is_array()) Malformed(source, "keyframes must be an array");
    std::set<std::size_t> seen;
    for (const json& v : arr) {
      if (!v.is_number_unsigned()) {
        Malformed(source, "keyframe indices must be non-negative integers");
      }
      const std::size_t k = v.get<std::size_t>();
      if (k >= rec.num_frames) {
        throw FormatError(FormatErrorKind::kMalformed,
                          source + ": keyframe index " + std::to_string(k) +
                              " out of range [0, " + std::to_string(rec.num_frames) + ")");
      }
      if (!seen.insert(k).second) {
        Malformed(source, "duplicate keyframe index " + std::to_string(k));
      }
    }
    rec.keyframes.assign(seen.begin(), seen.end());
  } else if (rec.frame_scores) {
    const auto& s = *rec.frame_scores;
    std::vector<std::size_t> order(s.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });
    order.resize(BudgetFrames(rec.num_frames, 0.15));
    std::sort(order.begin(), order.end());
    rec.keyframes = std::move(order);
    rec.binarized_from_scores = true;
  } else {
    Malformed(source, "missing field 'keyframes'");
  }
  return rec;
}

std::string SerializeAnnotation(const AnnotationRecord& record) {
  json doc;
  doc["video_id"] = record.video_id;
  doc["num_frames"] = record.num_frames;
  doc["keyframes"] = record.keyframes;
  if (record.frame_scores) doc["frame_scores"] = *record.frame_scores;
  return doc.dump(2) + "\n";
}

AnnotationRecord LoadAnnotation(const fs::path& path) {
  return ParseAnnotation(ReadTextFile(path), path.string());
}

void WriteAnnotation(const fs::path& path, const AnnotationRecord& record) {
  WriteTextFile(path, SerializeAnnotation(record));
}

// ---------------------------------------------------------------------------
// Manifests and splits

DatasetManifest LoadManifest(const fs::path& path) {
  const std::string source = path.string();
  const json doc = ParseJson(ReadTextFile(path), source);
  DatasetManifest m;
  m.base_dir = path.parent_path();
  const json& videos = Field(doc, "videos", source);
  if (!videos.is_array()) Malformed(source, "videos must be an array");
  std::set<std::string> ids;
  for (const json& v : videos) {
    VideoEntry e;
    e.video_id = StringField(v, "video_id", source);
    e.num_frames = SizeField(v, "num_frames", source);
    e.feature_dim = SizeField(v, "feature_dim", source);
    e.features = StringField(v, "features", source);
    e.annotation = StringField(v, "annotation", source);
    e.binarized_from_scores = v.value("binarized_from_scores", false);
    if (!ids.insert(e.video_id).second) {
      Malformed(source, "duplicate video id " + e.video_id);
    }
    m.videos.push_back(std::move(e));
  }
  if (doc.contains("splits")) {
    const json& splits = doc.at("splits");
    for (const auto& [key, target] :
         {std::pair{"train", &m.train_ids}, std::pair{"test", &m.test_ids}}) {
      if (!splits.contains(key)) continue;
      for (const json& id : splits.at(key)) {
        const std::string s = id.get<std::string>();
        if (!ids.count(s)) Malformed(source, "split references unknown video " + s);
        target->push_back(s);
      }
    }
  }
  return m;
}

void WriteManifest(const fs::path& path, const DatasetManifest& manifest) {
  json doc;
  doc["format"] = "dtrsum-manifest";
  doc["version"] = 1;
  doc["videos"] = json::array();
  for (const VideoEntry& e : manifest.videos) {
    doc["videos"].push_back({{"video_id", e.video_id},
                             {"num_frames", e.num_frames},
                             {"feature_dim", e.feature_dim},
                             {"features", e.features.generic_string()},
                             {"annotation", e.annotation.generic_string()},
                             {"binarized_from_scores", e.binarized_from_scores}});
  }
  doc["splits"] = {{"train", manifest.train_ids}, {"test", manifest.test_ids}};
  WriteTextFile(path, doc.dump(2) + "\n");
}

SplitIds SplitDataset(const std::vector<std::string>& ids, double ratio,
                      std::uint64_t seed) {
  if (ids.size() < 2) throw ValidationError("splitting needs at least 2 videos");
  if (!(ratio > 0.0 && ratio <= 1.0)) {
    throw ValidationError("split ratio must lie in (0, 1]");
  }
  std::vector<std::string> shuffled = ids;
  Rng rng = Rng(seed).Fork(RngStream::kSplit);
  rng.Shuffle(shuffled);
  const auto n_train = static_cast<std::size_t>(
      std::ceil(ratio * static_cast<double>(ids.size()) - 1e-9));
  SplitIds out;
  out.train.assign(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.test.assign(shuffled.begin() + static_cast<std::ptrdiff_t>(n_train), shuffled.end());
  return out;
}

const Video& Dataset::Find(const std::string& id) const {
  for (const Video& v : videos) {
    if (v.id == id) return v;
  }
  throw ValidationError("unknown video id " + id);
}

std::vector<const Video*> Dataset::Split(SplitKind kind) const {
  std::vector<const Video*> out;
  if (kind == SplitKind::kAll) {
    for (const Video& v : videos) out.push_back(&v);
    return out;
  }
  for (const std::string& id : kind == SplitKind::kTrain ? train_ids : test_ids) {
    out.push_back(&Find(id));
  }
  return out;
}

std::size_t Dataset::feature_dim() const {
  return videos.empty() ? 0 : videos.front().features.cols();
}

Dataset LoadDataset(const DatasetManifest& manifest) {
  if (manifest.videos.empty()) throw ValidationError("manifest lists no videos");
  Dataset ds;
  const std::size_t dim = manifest.videos.front().feature_dim;
  for (const VideoEntry& e : manifest.videos) {
    const fs::path fpath = manifest.Resolve(e.features);
    const FeatureHeader h = ReadFeatureHeader(fpath);
    if (h.frames != e.num_frames || h.dim != e.feature_dim) {
      throw FormatError(FormatErrorKind::kManifestMismatch,
                        "video " + e.video_id + ": manifest says " +
                            std::to_string(e.num_frames) + " x " +
                            std::to_string(e.feature_dim) + ", " + fpath.string() +
                            " holds " + std::to_string(h.frames) + " x " +
                            std::to_string(h.dim));
    }
    if (e.feature_dim != dim) {
      throw FormatError(FormatErrorKind::kManifestMismatch,
                        "video " + e.video_id + " has feature dim " +
                            std::to_string(e.feature_dim) + ", expected " +
                            std::to_string(dim));
    }
    Video v;
    v.id = e.video_id;
    v.annotation = LoadAnnotation(manifest.Resolve(e.annotation));
    if (v.annotation.video_id != e.video_id ||
        v.annotation.num_frames != e.num_frames) {
      throw FormatError(FormatErrorKind::kManifestMismatch,
                        "annotation for " + e.video_id +
                            " disagrees with the manifest on id or frame count");
    }
    v.features = LoadFeatures(fpath);
    ds.videos.push_back(std::move(v));
  }
  ds.train_ids = manifest.train_ids;
  ds.test_ids = manifest.test_ids;
  if (ds.train_ids.empty() && ds.test_ids.empty()) {
    for (const Video& v : ds.videos) ds.train_ids.push_back(v.id);
  }
  return ds;
}

Dataset LoadDataset(const fs::path& manifest_path) {
  return LoadDataset(LoadManifest(manifest_path));
}

SplitKind ParseSplitKind(const std::string& name) {
  if (name == "train") return SplitKind::kTrain;
  if (name == "test") return SplitKind::kTest;
  if (name == "all") return SplitKind::kAll;
  throw ValidationError("unknown split '" + name + "' (expected train, test or all)");
}

}  // namespace dtrsum
