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

// I_t = f_e,t * s_t. `scores` is T x 1.
ad::Var MaskSummary(ad::Var encoded, ad::Var scores);

// T i.i.d. draws from U[0, 1).
std::vector<double> SampleRandomScores(std::size_t frames, Rng& rng);

struct DiscriminatorScores {
  ad::Var real;       // (video, ground-truth summary)
  ad::Var generated;  // (video, generated summary)
  ad::Var random;     // (video, random summary); invalid if not requested
};

// Scores (video, summary) pairs. The video and the summary each go through
// their own Bi-LSTM; one summary encoder is shared by every summary slot.
// Each Bi-LSTM output is pooled to [last forward state, first backward
// state], the pair is concatenated and fed to a ReLU MLP with a sigmoid
// scalar output.
class Discriminator {
 public:
  Discriminator() = default;
  Discriminator(const ModelConfig& config, Rng& init_rng);

  ad::Var EncodeVideo(ad::Var features) const;
  ad::Var EncodeSummary(ad::Var masked) const;
  // 1 x 1 score in (0, 1) from two pooled representations.
  ad::Var Score(ad::Var video_repr, ad::Var summary_repr) const;
  ad::Var Discriminate(ad::Var features, ad::Var masked) const;
  // The video encoding is computed once and reused for all pairs. Pass an
  // invalid `random` to skip the random pair.
  DiscriminatorScores DiscriminateTriple(ad::Var features, ad::Var real,
                                         ad::Var generated,
                                         ad::Var random) const;

  ParamRefs Params();
  const ModelConfig& config() const { return config_; }

  BiLstm video_encoder;
  BiLstm summary_encoder;
  std::vector<Linear> head;
  Linear output;

 private:
  ModelConfig config_;
};

}  // namespace dtrsum
