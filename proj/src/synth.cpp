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

#include "dtrsum/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "json.hpp"

namespace dtrsum {

using json = nlohmann::json;

void SyntheticSpec::Validate() const {
  if (videos == 0) throw ValidationError("synthetic spec: videos must be >= 1");
  if (feature_dim == 0) throw ValidationError("synthetic spec: feature_dim must be >= 1");
  if (segments == 0) throw ValidationError("synthetic spec: segments must be >= 1");
  if (min_frames > max_frames) {
    throw ValidationError("synthetic spec: min_frames exceeds max_frames");
  }
  if (min_frames < 2 * segments) {
    throw ValidationError("synthetic spec: need at least 2 frames per segment");
  }
  if (!(key_fraction > 0.0 && key_fraction < 1.0)) {
    throw ValidationError("synthetic spec: key_fraction must lie in (0, 1)");
  }
  if (!(budget_fraction > 0.0 && budget_fraction < 1.0)) {
    throw ValidationError("synthetic spec: budget_fraction must lie in (0, 1)");
  }
  if (!(separation > 0.0)) throw ValidationError("synthetic spec: separation must be > 0");
  if (!(noise >= 0.0)) throw ValidationError("synthetic spec: noise must be >= 0");
  if (!(salience >= 0.0)) throw ValidationError("synthetic spec: salience must be >= 0");
  if (!(train_ratio > 0.0 && train_ratio <= 1.0)) {
    throw ValidationError("synthetic spec: train_ratio must lie in (0, 1]");
  }
}

SyntheticSpec ParseSyntheticSpec(const std::string& json_text,
                                 const std::string& source) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw FormatError(FormatErrorKind::kMalformed,
                      source + ": invalid JSON: " + e.what());
  }
  if (!doc.is_object()) {
    throw FormatError(FormatErrorKind::kMalformed, source + ": expected an object");
  }
  SyntheticSpec s;
  static const char* kKnown[] = {"videos", "min_frames", "max_frames", "feature_dim",
                                 "segments", "key_fraction", "separation", "noise",
                                 "salience", "budget_fraction", "train_ratio", "seed"};
  for (const auto& [key, _] : doc.items()) {
    if (std::find_if(std::begin(kKnown), std::end(kKnown),
                     [&](const char* k) { return key == k; }) == std::end(kKnown)) {
      throw FormatError(FormatErrorKind::kMalformed,
                        source + ": unknown synthetic spec field '" + key + "'");
    }
  }
  try {
    s.videos = doc.value("videos", s.videos);
    s.min_frames = doc.value("min_frames", s.min_frames);
    s.max_frames = doc.value("max_frames", s.max_frames);
    s.feature_dim = doc.value("feature_dim", s.feature_dim);
    s.segments = doc.value("segments", s.segments);
    s.key_fraction = doc.value("key_fraction", s.key_fraction);
    s.separation = doc.value("separation", s.separation);
    s.noise = doc.value("noise", s.noise);
    s.salience = doc.value("salience", s.salience);
    s.budget_fraction = doc.value("budget_fraction", s.budget_fraction);
    s.train_ratio = doc.value("train_ratio", s.train_ratio);
    s.seed = doc.value("seed", s.seed);
  } catch (const json::exception& e) {
    throw FormatError(FormatErrorKind::kMalformed,
                      source + ": bad field type: " + e.what());
  }
  s.Validate();
  return s;
}

std::string SerializeSyntheticSpec(const SyntheticSpec& s) {
  json doc = {{"videos", s.videos},           {"min_frames", s.min_frames},
              {"max_frames", s.max_frames},   {"feature_dim", s.feature_dim},
              {"segments", s.segments},       {"key_fraction", s.key_fraction},
              {"separation", s.separation},   {"noise", s.noise},
              {"salience", s.salience},       {"budget_fraction", s.budget_fraction},
              {"train_ratio", s.train_ratio}, {"seed", s.seed}};
  return doc.dump(2) + "\n";
}

AnnotationRecord SyntheticVideo::Annotation() const {
  AnnotationRecord rec;
  rec.video_id = id;
  rec.num_frames = features.rows();
  rec.keyframes = keyframes;
  return rec;
}

namespace {

std::string VideoId(std::size_t index) {
  std::string digits = std::to_string(index);
  return "video_" + std::string(digits.size() < 3 ? 3 - digits.size() : 0, '0') + digits;
}

std::vector<std::size_t> BlockLengths(std::size_t frames, std::size_t blocks, Rng& rng) {
  std::vector<double> weights(blocks);
  for (double& w : weights) w = rng.Uniform(1.0, 2.0);
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<std::size_t> lengths(blocks);
  std::size_t used = 0;
  for (std::size_t k = 0; k < blocks; ++k) {
    lengths[k] = std::max<std::size_t>(
        2, static_cast<std::size_t>(std::floor(weights[k] / total * static_cast<double>(frames))));
    used += lengths[k];
  }
  // Hand out (or take back) the rounding remainder one frame at a time.
  for (std::size_t k = 0; used < frames; k = (k + 1) % blocks, ++used) ++lengths[k];
  for (std::size_t k = 0; used > frames; k = (k + 1) % blocks) {
    if (lengths[k] > 2) {
      --lengths[k];
      --used;
    }
  }
  return lengths;
}

double SquaredDistance(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return acc;
}

}  // namespace

SyntheticVideo GenerateSyntheticVideo(const SyntheticSpec& spec, std::size_t index) {
  spec.Validate();
  Rng rng = Rng(spec.seed).Fork(RngStream::kSynth).Fork(index);
  SyntheticVideo v;
  v.id = VideoId(index);

  const std::size_t frames =
      spec.min_frames + rng.Below(spec.max_frames - spec.min_frames + 1);
  const std::size_t blocks = spec.segments;
  const std::vector<std::size_t> lengths = BlockLengths(frames, blocks, rng);
  v.bounds.assign(1, 0);
  for (std::size_t len : lengths) v.bounds.push_back(v.bounds.back() + len);

  // Key blocks: random order, kept while they fit the budget.
  const std::size_t budget = BudgetFrames(frames, spec.budget_fraction);
  const std::size_t max_key = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(spec.key_fraction * static_cast<double>(blocks))));
  std::vector<std::size_t> order(blocks);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.Shuffle(order);
  std::size_t key_frames_used = 0;
  for (std::size_t k : order) {
    if (v.key_blocks.size() >= max_key) break;
    if (key_frames_used + lengths[k] <= budget) {
      v.key_blocks.push_back(k);
      key_frames_used += lengths[k];
    }
  }
  std::sort(v.key_blocks.begin(), v.key_blocks.end());
  std::vector<bool> is_key(blocks, false);
  for (std::size_t k : v.key_blocks) {
    is_key[k] = true;
    v.keyframes.push_back(v.bounds[k] + lengths[k] / 2);
  }

  // Block means: rejection-sampled until every pair is `separation` apart.
  const double min_sq = spec.separation * spec.separation;
  const std::size_t dim = spec.feature_dim;
  v.means.assign(blocks, std::vector<double>(dim, 0.0));
  for (std::size_t k = 0; k < blocks; ++k) {
    for (int attempt = 0;; ++attempt) {
      if (attempt > 10000) {
        throw ValidationError("synthetic spec: cannot place block means " +
                              std::to_string(spec.separation) + " apart");
      }
      std::vector<double>& mu = v.means[k];
      for (double& x : mu) x = spec.separation * rng.Normal();
      mu[0] = is_key[k] ? spec.salience : -spec.salience;
      if (dim > 1) mu[0] += 0.25 * spec.separation * rng.Normal();
      bool ok = true;
      for (std::size_t j = 0; j < k && ok; ++j) ok = SquaredDistance(mu, v.means[j]) >= min_sq;
      if (ok) break;
    }
  }

  v.features = Tensor::Matrix(frames, dim);
  for (std::size_t k = 0; k < blocks; ++k) {
    for (std::size_t t = v.bounds[k]; t < v.bounds[k + 1]; ++t) {
      for (std::size_t d = 0; d < dim; ++d) {
        v.features(t, d) = v.means[k][d] + spec.noise * rng.Normal();
      }
    }
  }
  v.features = RoundToStoredPrecision(v.features);
  return v;
}

std::vector<SyntheticVideo> GenerateSyntheticCorpus(const SyntheticSpec& spec) {
  std::vector<SyntheticVideo> out;
  out.reserve(spec.videos);
  for (std::size_t i = 0; i < spec.videos; ++i) out.push_back(GenerateSyntheticVideo(spec, i));
  return out;
}

namespace {

std::vector<std::string> Ids(const std::vector<SyntheticVideo>& corpus) {
  std::vector<std::string> ids;
  for (const SyntheticVideo& v : corpus) ids.push_back(v.id);
  return ids;
}

SplitIds CorpusSplit(const SyntheticSpec& spec, const std::vector<SyntheticVideo>& corpus) {
  if (corpus.size() < 2) return SplitIds{Ids(corpus), {}};
  return SplitDataset(Ids(corpus), spec.train_ratio, spec.seed);
}

}  // namespace

Dataset SyntheticDataset(const SyntheticSpec& spec) {
  const auto corpus = GenerateSyntheticCorpus(spec);
  Dataset ds;
  for (const SyntheticVideo& sv : corpus) {
    ds.videos.push_back(Video{sv.id, sv.features, sv.Annotation()});
  }
  SplitIds split = CorpusSplit(spec, corpus);
  ds.train_ids = std::move(split.train);
  ds.test_ids = std::move(split.test);
  return ds;
}

DatasetManifest SynthDataset(const SyntheticSpec& spec,
                             const std::filesystem::path& out_dir) {
  const auto corpus = GenerateSyntheticCorpus(spec);
  DatasetManifest manifest;
  manifest.base_dir = out_dir;
  for (const SyntheticVideo& sv : corpus) {
    VideoEntry e;
    e.video_id = sv.id;
    e.num_frames = sv.features.rows();
    e.feature_dim = sv.features.cols();
    e.features = fs::path("features") / (sv.id + ".dtrf");
    e.annotation = fs::path("annotations") / (sv.id + ".json");
    WriteFeatures(out_dir / e.features, sv.features);
    WriteAnnotation(out_dir / e.annotation, sv.Annotation());
    manifest.videos.push_back(std::move(e));
  }
  SplitIds split = CorpusSplit(spec, corpus);
  manifest.train_ids = std::move(split.train);
  manifest.test_ids = std::move(split.test);
  WriteManifest(out_dir / "manifest.json", manifest);
  WriteTextFile(out_dir / "synth_spec.json", SerializeSyntheticSpec(spec));
  return manifest;
}

}  // namespace dtrsum
