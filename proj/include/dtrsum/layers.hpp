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

#include <array>
#include <string>
#include <vector>

#include "dtrsum/autodiff.hpp"
#include "dtrsum/rng.hpp"
#include "dtrsum/tensor.hpp"

namespace dtrsum {

enum class Mode { kTrain, kInfer };

using ConstParamRefs = std::vector<const Parameter*>;

// Frames related by one dilated unit with hole size h: 2h + 1.
int TimeSpan(int hole);
// Input extent seen by one output frame after `layer` stacked layers of
// kernel size `kernel` with hole size h: h * (kernel - 1) * layer + 1.
int ReceptiveField(int hole, int kernel, int layer);

inline constexpr int kTemporalKernel = 3;
inline constexpr int kUnitsPerLayer = 4;
inline constexpr int kDtrLayers = 3;

using HoleSet = std::array<int, kUnitsPerLayer>;
inline constexpr HoleSet kDefaultHoles{1, 4, 16, 64};
inline constexpr HoleSet kShortRangeHoles{1, 2, 4, 16};
inline constexpr HoleSet kLongRangeHoles{16, 32, 64, 128};

// Affine map: y = x W + b, W: in x out, b: 1 x out.
class Linear {
 public:
  Linear() = default;
  Linear(const std::string& name, std::size_t in, std::size_t out, Rng& rng);

  ad::Var Forward(ad::Var x) const;
  std::size_t in_dim() const { return weight.value.rows(); }
  std::size_t out_dim() const { return weight.value.cols(); }
  void CollectParams(ParamRefs& out) { out.push_back(&weight); out.push_back(&bias); }

  Parameter weight;
  Parameter bias;
};

// Dilated temporal relational unit: a kernel-3 temporal convolution over
// frames {t - h, t, t + h} with zero padding and full channel mixing.
// The weight stacks the three taps row-wise: [W_prev; W_center; W_next],
// each in_dim x out_dim, so row t of the output is
//   concat(f[t-h], f[t], f[t+h]) * weight + bias.
class DtrUnit {
 public:
  DtrUnit() = default;
  DtrUnit(const std::string& name, int hole, std::size_t in, std::size_t out,
          Rng& rng);

  ad::Var Forward(ad::Var features) const;
  int hole() const { return hole_; }
  std::size_t in_dim() const { return in_dim_; }
  std::size_t out_dim() const { return out_dim_; }
  void CollectParams(ParamRefs& out) { out.push_back(&weight); out.push_back(&bias); }

  Parameter weight;
  Parameter bias;

 private:
  int hole_ = 1;
  std::size_t in_dim_ = 0;
  std::size_t out_dim_ = 0;
};

struct BatchStats {
  Tensor mean;
  Tensor var;
};

// Four units with distinct hole sizes, summed, then batch norm over the
// temporal axis and ReLU.
class DtrLayer {
 public:
  static constexpr double kMomentum = 0.9;
  static constexpr double kEpsilon = 1e-9;

  DtrLayer() = default;
  DtrLayer(const std::string& name, const HoleSet& holes, std::size_t dim,
           Rng& rng);

  // When `stats` is non-null and the mode is training with more than one
  // frame, the batch statistics are written there for UpdateRunningStats().
  ad::Var Forward(ad::Var features, Mode mode, BatchStats* stats = nullptr) const;
  void UpdateRunningStats(const BatchStats& stats);

  void CollectParams(ParamRefs& out);
  void CollectBuffers(ParamRefs& out);

  std::array<DtrUnit, kUnitsPerLayer> units;
  Parameter gamma;
  Parameter beta;
  Parameter running_mean;
  Parameter running_var;
  // Test hook: skip normalisation so identity kernels can be checked exactly.
  bool bypass_batch_norm = false;
};

class DtrNetwork {
 public:
  struct Output {
    ad::Var features;
    std::vector<ad::Var> per_layer;
  };

  DtrNetwork() = default;
  DtrNetwork(const std::string& name, const HoleSet& holes, std::size_t dim,
             Rng& rng);

  Output Forward(ad::Var features, Mode mode,
                 std::vector<BatchStats>* stats = nullptr) const;
  void UpdateRunningStats(const std::vector<BatchStats>& stats);

  void CollectParams(ParamRefs& out);
  void CollectBuffers(ParamRefs& out);
  HoleSet holes() const;

  std::vector<DtrLayer> layers;
};

enum class Direction { kForward, kBackward };

// Four-gate LSTM (input, forget, output, candidate) with zero initial
// hidden and cell state. Gate columns of the weights are laid out in that
// order: [i | f | o | g], each `hidden` wide.
class Lstm {
 public:
  Lstm() = default;
  Lstm(const std::string& name, std::size_t in, std::size_t hidden, Rng& rng);

  // T x hidden, rows in original time order for either direction.
  ad::Var Forward(ad::Var x, Direction direction) const;

  std::size_t in_dim() const { return w_input.value.rows(); }
  std::size_t hidden() const { return w_recurrent.value.rows(); }
  void CollectParams(ParamRefs& out);

  Parameter w_input;      // in x 4H
  Parameter w_recurrent;  // H x 4H
  Parameter bias;         // 1 x 4H
};

class BiLstm {
 public:
  BiLstm() = default;
  BiLstm(const std::string& name, std::size_t in, std::size_t hidden, Rng& rng);

  // T x 2H: row t = [forward h_t, backward h_t].
  ad::Var Forward(ad::Var x) const;
  std::size_t hidden() const { return forward.hidden(); }
  void CollectParams(ParamRefs& out);

  Lstm forward;
  Lstm backward;
};

}  // namespace dtrsum
