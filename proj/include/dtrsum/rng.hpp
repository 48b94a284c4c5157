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
#include <random>
#include <utility>
#include <vector>

namespace dtrsum {

// Named streams so that data sampling, dropout, random summaries and weight
// initialisation never share draws.
enum class RngStream : std::uint64_t {
  kInit = 1,
  kData = 2,
  kDropout = 3,
  kRandomSummary = 4,
  kSplit = 5,
  kSynth = 6,
};

// Seeded 64-bit generator. Distribution transforms are implemented here
// rather than with <random> distributions, whose outputs are
// implementation-defined, so streams are reproducible across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t NextU64() { return engine_(); }

  // Uniform on [0, 1) with 53 bits of resolution.
  double Uniform();
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }
  double Normal();
  // Uniform integer on [0, n).
  std::uint64_t Below(std::uint64_t n);

  // Independent generator derived from this one's seed.
  Rng Fork(RngStream stream) const { return Fork(static_cast<std::uint64_t>(stream)); }
  Rng Fork(std::uint64_t stream) const;

  template <typename T>
  void Shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[Below(i)]);
    }
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

std::uint64_t SplitMix64(std::uint64_t x);

}  // namespace dtrsum
