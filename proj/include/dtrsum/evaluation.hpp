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
#include <cstdint>
#include <span>
#include <vector>

#include "dtrsum/tensor.hpp"

namespace dtrsum {

using FrameMask = std::vector<std::uint8_t>;

// Contiguous partition of [0, T). bounds = {0, b_1, ..., T}, strictly
// increasing; segment i covers [bounds[i], bounds[i + 1]).
class Segmentation {
 public:
  Segmentation() = default;
  explicit Segmentation(std::vector<std::size_t> bounds);

  std::size_t num_segments() const { return bounds_.size() - 1; }
  std::size_t frames() const { return bounds_.back(); }
  std::size_t begin(std::size_t i) const { return bounds_[i]; }
  std::size_t end(std::size_t i) const { return bounds_[i + 1]; }
  std::size_t length(std::size_t i) const { return bounds_[i + 1] - bounds_[i]; }
  const std::vector<std::size_t>& bounds() const { return bounds_; }

  friend bool operator==(const Segmentation&, const Segmentation&) = default;

 private:
  std::vector<std::size_t> bounds_{0};
};

// Within-segment squared-Euclidean scatter summed over segments, plus
// penalty * (number of segments).
double SegmentationObjective(const Tensor& features, const Segmentation& seg,
                             double penalty);

// Scale-normalised default penalty: scatter(whole video) / (4 * max_segments).
double DefaultKtsPenalty(const Tensor& features, std::size_t max_segments);

// Exact change-point segmentation by dynamic programming, O(m_max * T^2).
// Minimises SegmentationObjective over all segmentations with at most
// max_segments segments. Ties prefer fewer segments, then earlier bounds.
Segmentation KtsSegment(const Tensor& features, std::size_t max_segments,
                        double penalty);
Segmentation KtsSegment(const Tensor& features, std::size_t max_segments);

// Exact 0/1 knapsack. Items with value <= 0 are never chosen. Among optimal
// selections the lexicographically earliest one wins (an item is taken
// whenever some optimum contains it, scanning from index 0). Returns the
// selected indices in increasing order.
std::vector<std::size_t> KnapsackSelect(std::span<const double> values,
                                        std::span<const std::size_t> weights,
                                        std::size_t capacity);

// floor(fraction * frames): the summary must stay within this many frames.
std::size_t BudgetFrames(std::size_t frames, double fraction);

struct Keyshots {
  std::vector<std::size_t> selected;  // segment indices
  FrameMask mask;                     // per frame, 1 if inside a selected segment

  std::size_t duration() const;
};

enum class KeyframeRule {
  kAtLeastOne,  // a segment qualifies with one or more key frames
  kMoreThanOne, // literal reading: strictly more than one
};

// Segments holding key frames become candidates worth their length; the
// knapsack then keeps the budget.
Keyshots KeyframesToKeyshots(std::span<const std::uint8_t> keyframes,
                             const Segmentation& seg, double budget_fraction,
                             KeyframeRule rule = KeyframeRule::kAtLeastOne);

// Segment value = sum of its frame scores, weight = its length.
Keyshots ScoresToKeyshots(std::span<const double> scores,
                          const Segmentation& seg, double budget_fraction);

struct Overlap {
  double precision = 0.0;
  double recall = 0.0;
  std::size_t generated = 0;  // |A|
  std::size_t reference = 0;  // |B|
  std::size_t overlap = 0;    // |A and B|
};

// P = |A and B| / |A|, R = |A and B| / |B|, each 0 when its denominator is.
Overlap PrecisionRecall(std::span<const std::uint8_t> generated,
                        std::span<const std::uint8_t> reference);

// Harmonic mean scaled to [0, 100]; 0 when P + R = 0.
double FMeasure(double precision, double recall);

struct EvalConfig {
  double budget_fraction = 0.15;
  // 0 selects min(T, max(1, T / 10)).
  std::size_t kts_max_segments = 0;
  // Negative selects DefaultKtsPenalty.
  double kts_penalty = -1.0;
  KeyframeRule keyframe_rule = KeyframeRule::kAtLeastOne;
};

struct EvalResult {
  double precision = 0.0;
  double recall = 0.0;
  double f_measure = 0.0;
  Overlap overlap;
  Segmentation segmentation;
  Keyshots generated;
  Keyshots reference;
};

std::size_t ResolveMaxSegments(std::size_t frames, const EvalConfig& config);
Segmentation SegmentForEval(const Tensor& features, const EvalConfig& config);

// Full keyshot protocol: segment, build A from scores and B from key
// frames, then precision / recall / F.
EvalResult EvaluateVideo(std::span<const double> scores,
                         std::span<const std::uint8_t> keyframes,
                         const Tensor& features, const EvalConfig& config);
EvalResult EvaluateVideo(std::span<const double> scores,
                         std::span<const std::uint8_t> keyframes,
                         const Segmentation& seg, const EvalConfig& config);

}  // namespace dtrsum
