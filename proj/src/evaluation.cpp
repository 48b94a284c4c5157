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

#include "dtrsum/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace dtrsum {

Segmentation::Segmentation(std::vector<std::size_t> bounds)
    : bounds_(std::move(bounds)) {
  if (bounds_.size() < 2 || bounds_.front() != 0) {
    throw ValidationError("segmentation bounds must start at 0 and hold >= 1 segment");
  }
  for (std::size_t i = 1; i < bounds_.size(); ++i) {
    if (bounds_[i] <= bounds_[i - 1]) {
      throw ValidationError("segmentation bounds must be strictly increasing");
    }
  }
}

namespace {

// Prefix sums giving the scatter of any [a, b) range in O(D).
class ScatterTable {
 public:
  explicit ScatterTable(const Tensor& f)
      : frames_(f.rows()), dim_(f.cols()),
        sum_((frames_ + 1) * dim_, 0.0), sq_(frames_ + 1, 0.0) {
    for (std::size_t t = 0; t < frames_; ++t) {
      double sq = 0.0;
      for (std::size_t d = 0; d < dim_; ++d) {
        const double v = f(t, d);
        sum_[(t + 1) * dim_ + d] = sum_[t * dim_ + d] + v;
        sq += v * v;
      }
      sq_[t + 1] = sq_[t] + sq;
    }
  }

  double Cost(std::size_t a, std::size_t b) const {
    const double n = static_cast<double>(b - a);
    double norm = 0.0;
    for (std::size_t d = 0; d < dim_; ++d) {
      const double s = sum_[b * dim_ + d] - sum_[a * dim_ + d];
      norm += s * s;
    }
    return std::max(0.0, (sq_[b] - sq_[a]) - norm / n);
  }

 private:
  std::size_t frames_;
  std::size_t dim_;
  std::vector<double> sum_;
  std::vector<double> sq_;
};

void RequireFeatures(const Tensor& f) {
  if (f.rank() != 2 || f.rows() == 0 || f.cols() == 0) {
    throw ValidationError("segmentation needs a non-empty T x D feature matrix");
  }
}

}  // namespace

double SegmentationObjective(const Tensor& features, const Segmentation& seg,
                             double penalty) {
  RequireFeatures(features);
  if (seg.frames() != features.rows()) {
    throw ValidationError("segmentation covers " + std::to_string(seg.frames()) +
                          " frames, features have " +
                          std::to_string(features.rows()));
  }
  const ScatterTable table(features);
  double total = penalty * static_cast<double>(seg.num_segments());
  for (std::size_t i = 0; i < seg.num_segments(); ++i) {
    total += table.Cost(seg.begin(i), seg.end(i));
  }
  return total;
}

double DefaultKtsPenalty(const Tensor& features, std::size_t max_segments) {
  RequireFeatures(features);
  if (max_segments == 0) throw ValidationError("max_segments must be >= 1");
  const ScatterTable table(features);
  return table.Cost(0, features.rows()) / (4.0 * static_cast<double>(max_segments));
}

Segmentation KtsSegment(const Tensor& features, std::size_t max_segments,
                        double penalty) {
  RequireFeatures(features);
  const std::size_t frames = features.rows();
  if (max_segments == 0) throw ValidationError("max_segments must be >= 1");
  if (max_segments > frames) {
    throw ValidationError("max_segments " + std::to_string(max_segments) +
                          " exceeds frame count " + std::to_string(frames));
  }
  const ScatterTable table(features);

  // cost[a * (T + 1) + b] for a < b.
  const std::size_t stride = frames + 1;
  std::vector<double> cost(stride * stride, 0.0);
  for (std::size_t a = 0; a < frames; ++a) {
    for (std::size_t b = a + 1; b <= frames; ++b) {
      cost[a * stride + b] = table.Cost(a, b);
    }
  }

  constexpr double kInf = std::numeric_limits<double>::infinity();
  // best[m][t]: minimal scatter of frames [0, t) split into m segments.
  std::vector<std::vector<double>> best(max_segments + 1,
                                        std::vector<double>(stride, kInf));
  std::vector<std::vector<std::size_t>> back(
      max_segments + 1, std::vector<std::size_t>(stride, 0));
  for (std::size_t t = 1; t <= frames; ++t) best[1][t] = cost[t];
  for (std::size_t m = 2; m <= max_segments; ++m) {
    for (std::size_t t = m; t <= frames; ++t) {
      double value = kInf;
      std::size_t arg = 0;
      for (std::size_t s = m - 1; s < t; ++s) {
        const double candidate = best[m - 1][s] + cost[s * stride + t];
        if (candidate < value) {
          value = candidate;
          arg = s;
        }
      }
      best[m][t] = value;
      back[m][t] = arg;
    }
  }

  std::size_t chosen = 1;
  double chosen_value = best[1][frames] + penalty;
  for (std::size_t m = 2; m <= max_segments; ++m) {
    const double value = best[m][frames] + penalty * static_cast<double>(m);
    if (value < chosen_value) {
      chosen_value = value;
      chosen = m;
    }
  }

  std::vector<std::size_t> bounds(chosen + 1);
  bounds[chosen] = frames;
  std::size_t t = frames;
  for (std::size_t m = chosen; m >= 2; --m) {
    t = back[m][t];
    bounds[m - 1] = t;
  }
  bounds[0] = 0;
  return Segmentation(std::move(bounds));
}

Segmentation KtsSegment(const Tensor& features, std::size_t max_segments) {
  return KtsSegment(features, max_segments,
                    DefaultKtsPenalty(features, max_segments));
}

std::vector<std::size_t> KnapsackSelect(std::span<const double> values,
                                        std::span<const std::size_t> weights,
                                        std::size_t capacity) {
  if (values.size() != weights.size()) {
    throw ValidationError("knapsack: values and weights differ in length");
  }
  const std::size_t n = values.size();
  for (std::size_t w : weights) {
    if (w == 0) throw ValidationError("knapsack: item weights must be >= 1");
  }
  // suffix[i][c]: best value using items i..n-1 within capacity c. Scanning
  // suffixes lets the reconstruction walk forward and keep the earliest
  // items of an optimal selection.
  const std::size_t width = capacity + 1;
  std::vector<double> suffix((n + 1) * width, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    const double* next = &suffix[(i + 1) * width];
    double* row = &suffix[i * width];
    for (std::size_t c = 0; c <= capacity; ++c) {
      double value = next[c];
      if (values[i] > 0.0 && weights[i] <= c) {
        value = std::max(value, values[i] + next[c - weights[i]]);
      }
      row[c] = value;
    }
  }
  std::vector<std::size_t> selected;
  std::size_t c = capacity;
  for (std::size_t i = 0; i < n; ++i) {
    if (values[i] > 0.0 && weights[i] <= c &&
        values[i] + suffix[(i + 1) * width + c - weights[i]] ==
            suffix[i * width + c]) {
      selected.push_back(i);
      c -= weights[i];
    }
  }
  return selected;
}

std::size_t BudgetFrames(std::size_t frames, double fraction) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw ValidationError("budget fraction must lie in [0, 1]");
  }
  // The epsilon absorbs representation error, e.g. 0.15 * 20 = 3.
  return static_cast<std::size_t>(
      std::floor(fraction * static_cast<double>(frames) + 1e-9));
}

std::size_t Keyshots::duration() const {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), 1));
}

namespace {

Keyshots SelectSegments(std::span<const double> values, const Segmentation& seg,
                        double budget_fraction) {
  std::vector<std::size_t> weights(seg.num_segments());
  for (std::size_t i = 0; i < weights.size(); ++i) weights[i] = seg.length(i);
  Keyshots shots;
  shots.selected = KnapsackSelect(values, weights,
                                  BudgetFrames(seg.frames(), budget_fraction));
  shots.mask.assign(seg.frames(), 0);
  for (std::size_t i : shots.selected) {
    std::fill(shots.mask.begin() + static_cast<std::ptrdiff_t>(seg.begin(i)),
              shots.mask.begin() + static_cast<std::ptrdiff_t>(seg.end(i)), 1);
  }
  return shots;
}

}  // namespace

Keyshots KeyframesToKeyshots(std::span<const std::uint8_t> keyframes,
                             const Segmentation& seg, double budget_fraction,
                             KeyframeRule rule) {
  if (keyframes.size() != seg.frames()) {
    throw ValidationError("key-frame mask length differs from segmentation");
  }
  const std::size_t needed = rule == KeyframeRule::kAtLeastOne ? 1 : 2;
  std::vector<double> values(seg.num_segments(), 0.0);
  for (std::size_t i = 0; i < seg.num_segments(); ++i) {
    std::size_t hits = 0;
    for (std::size_t t = seg.begin(i); t < seg.end(i); ++t) hits += keyframes[t] != 0;
    if (hits >= needed) values[i] = static_cast<double>(seg.length(i));
  }
  return SelectSegments(values, seg, budget_fraction);
}

Keyshots ScoresToKeyshots(std::span<const double> scores,
                          const Segmentation& seg, double budget_fraction) {
  if (scores.size() != seg.frames()) {
    throw ValidationError("score vector length differs from segmentation");
  }
  std::vector<double> values(seg.num_segments(), 0.0);
  for (std::size_t i = 0; i < seg.num_segments(); ++i) {
    for (std::size_t t = seg.begin(i); t < seg.end(i); ++t) values[i] += scores[t];
  }
  return SelectSegments(values, seg, budget_fraction);
}

Overlap PrecisionRecall(std::span<const std::uint8_t> generated,
                        std::span<const std::uint8_t> reference) {
  if (generated.size() != reference.size()) {
    throw ValidationError("precision/recall: mask lengths differ (" +
                          std::to_string(generated.size()) + " vs " +
                          std::to_string(reference.size()) + ")");
  }
  Overlap o;
  for (std::size_t t = 0; t < generated.size(); ++t) {
    const bool a = generated[t] != 0, b = reference[t] != 0;
    o.generated += a;
    o.reference += b;
    o.overlap += a && b;
  }
  o.precision = o.generated ? static_cast<double>(o.overlap) / static_cast<double>(o.generated) : 0.0;
  o.recall = o.reference ? static_cast<double>(o.overlap) / static_cast<double>(o.reference) : 0.0;
  return o;
}

double FMeasure(double precision, double recall) {
  if (precision + recall <= 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall) * 100.0;
}

std::size_t ResolveMaxSegments(std::size_t frames, const EvalConfig& config) {
  if (config.kts_max_segments > 0) {
    return std::min(config.kts_max_segments, frames);
  }
  return std::min(frames, std::max<std::size_t>(1, frames / 10));
}

Segmentation SegmentForEval(const Tensor& features, const EvalConfig& config) {
  const std::size_t m_max = ResolveMaxSegments(features.rows(), config);
  const double penalty = config.kts_penalty >= 0.0
                             ? config.kts_penalty
                             : DefaultKtsPenalty(features, m_max);
  return KtsSegment(features, m_max, penalty);
}

EvalResult EvaluateVideo(std::span<const double> scores,
                         std::span<const std::uint8_t> keyframes,
                         const Tensor& features, const EvalConfig& config) {
  if (features.rank() != 2 || features.rows() != scores.size()) {
    throw ValidationError("evaluate: features and scores differ in frame count");
  }
  return EvaluateVideo(scores, keyframes, SegmentForEval(features, config), config);
}

EvalResult EvaluateVideo(std::span<const double> scores,
                         std::span<const std::uint8_t> keyframes,
                         const Segmentation& seg, const EvalConfig& config) {
  EvalResult r;
  r.segmentation = seg;
  r.generated = ScoresToKeyshots(scores, seg, config.budget_fraction);
  r.reference = KeyframesToKeyshots(keyframes, seg, config.budget_fraction,
                                    config.keyframe_rule);
  r.overlap = PrecisionRecall(r.generated.mask, r.reference.mask);
  r.precision = r.overlap.precision;
  r.recall = r.overlap.recall;
  r.f_measure = FMeasure(r.precision, r.recall);
  return r;
}

}  // namespace dtrsum
