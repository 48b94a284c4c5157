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

#include <algorithm>
#include <cstdint>
#include <limits>
#include <vector>

#include "dtrsum/evaluation.hpp"

namespace dtrsum::testing {

// Best subset by exhaustive search; ties prefer the inclusion vector that
// is lexicographically largest (earliest items first).
inline std::vector<std::size_t> BruteKnapsack(const std::vector<double>& values,
                                       const std::vector<std::size_t>& weights,
                                       std::size_t capacity, double* best_value) {
  const std::size_t n = values.size();
  double best = -1.0;
  std::uint32_t best_mask = 0;
  auto earlier = [n](std::uint32_t a, std::uint32_t b) {
    for (std::size_t i = 0; i < n; ++i) {
      const bool ia = a >> i & 1u, ib = b >> i & 1u;
      if (ia != ib) return ia;
    }
    return false;
  };
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    double v = 0.0;
    std::size_t w = 0;
    bool ok = true;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask >> i & 1u) {
        if (values[i] <= 0.0) ok = false;
        v += values[i];
        w += weights[i];
      }
    }
    if (!ok || w > capacity) continue;
    if (v > best || (v == best && earlier(mask, best_mask))) {
      best = v;
      best_mask = mask;
    }
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (best_mask >> i & 1u) out.push_back(i);
  }
  *best_value = best;
  return out;
}

// Minimal objective over every segmentation with at most m_max segments.
inline double BruteKts(const Tensor& f, std::size_t m_max, double penalty) {
  const std::size_t frames = f.rows();
  double best = std::numeric_limits<double>::infinity();
  // Each subset of the T-1 interior cut positions is a segmentation.
  for (std::uint32_t cuts = 0; cuts < (1u << (frames - 1)); ++cuts) {
    std::vector<std::size_t> bounds{0};
    for (std::size_t k = 1; k < frames; ++k) {
      if (cuts >> (k - 1) & 1u) bounds.push_back(k);
    }
    bounds.push_back(frames);
    if (bounds.size() - 1 > m_max) continue;
    best = std::min(best, SegmentationObjective(f, Segmentation(bounds), penalty));
  }
  return best;
}

}  // namespace dtrsum::testing
