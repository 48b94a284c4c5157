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

#include <vector>

#include "dtrsum/autodiff.hpp"
#include "dtrsum/layers.hpp"
#include "dtrsum/model_config.hpp"

namespace dtrsum {

// Output of the temporal encoding module: the Bi-LSTM branch (T x 2H) and
// the dilated relational branch (T x D). The two are independent given the
// input features.
struct TemporalFeatures {
  ad::Var temporal;
  ad::Var relational;
};

struct GeneratorOptions {
  Mode mode = Mode::kInfer;
  // Required in training mode when dropout > 0.
  Rng* dropout_rng = nullptr;
  // Receives per-layer batch statistics in training mode.
  std::vector<BatchStats>* stats = nullptr;
  // Inference only needs the scores.
  bool want_encoded = true;
};

struct GeneratorOutput {
  ad::Var scores;   // T x 1, each in (0, 1)
  ad::Var encoded;  // T x encoded_dim; invalid when not requested
  TemporalFeatures temporal;
};

// Frame scorer: temporal encoding, compact encoding of every frame, and a
// per-frame key-frame confidence.
class Generator {
 public:
  Generator() = default;
  Generator(const ModelConfig& config, Rng& init_rng);

  TemporalFeatures TemporalEncode(ad::Var features, Mode mode,
                                  std::vector<BatchStats>* stats = nullptr) const;
  // Row t: affine(concat(relational_t, temporal_t)), no activation.
  ad::Var EncodeVideo(const TemporalFeatures& temporal) const;
  // Row t: sigmoid(affine(dropout(concat(relational_t, temporal_t)))).
  ad::Var PredictScores(const TemporalFeatures& temporal, Mode mode,
                        Rng* dropout_rng) const;
  GeneratorOutput Forward(ad::Var features, const GeneratorOptions& options) const;

  // Whole-sequence inference: one pass, no windowing, dropout disabled.
  std::vector<double> Infer(const Tensor& features) const;

  void UpdateRunningStats(const std::vector<BatchStats>& stats) {
    dtr.UpdateRunningStats(stats);
  }

  ParamRefs Params();
  ParamRefs Buffers();
  const ModelConfig& config() const { return config_; }

  BiLstm bilstm;
  DtrNetwork dtr;
  Linear encoder;
  Linear scorer;

 private:
  ModelConfig config_;
};

}  // namespace dtrsum
