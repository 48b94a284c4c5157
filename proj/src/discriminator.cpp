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

#include "dtrsum/discriminator.hpp"

#include <string>

namespace dtrsum {

using ad::Var;

Var MaskSummary(Var encoded, Var scores) {
  const Tensor& e = encoded.value();
  const Tensor& s = scores.value();
  if (e.rank() != 2 || s.rank() != 2 || s.cols() != 1 || s.rows() != e.rows()) {
    throw ShapeError("mask_summary: " + std::to_string(e.rank() == 2 ? e.rows() : 0) +
                     " encoded frames vs scores of shape " +
                     ShapeString(s.shape()));
  }
  return ad::RowScale(encoded, scores);
}

std::vector<double> SampleRandomScores(std::size_t frames, Rng& rng) {
  if (frames == 0) throw ValidationError("random summary needs T >= 1");
  std::vector<double> s(frames);
  for (double& v : s) v = rng.Uniform();
  return s;
}

Discriminator::Discriminator(const ModelConfig& config, Rng& init_rng)
    : config_(config) {
  config.Validate();
  video_encoder = BiLstm("discriminator.video_encoder", config.feature_dim,
                         config.disc_hidden, init_rng);
  summary_encoder = BiLstm("discriminator.summary_encoder", config.encoded_dim,
                           config.disc_hidden, init_rng);
  std::size_t in = 4 * config.disc_hidden;
  for (std::size_t k = 0; k < config.head_widths.size(); ++k) {
    head.emplace_back("discriminator.head" + std::to_string(k), in,
                      config.head_widths[k], init_rng);
    in = config.head_widths[k];
  }
  output = Linear("discriminator.output", in, 1, init_rng);
}

namespace {

Var Pool(Var sequence, std::size_t hidden) {
  const std::size_t steps = sequence.value().rows();
  const Var ends[] = {
      ad::SliceCols(ad::SliceRows(sequence, steps - 1, steps), 0, hidden),
      ad::SliceCols(ad::SliceRows(sequence, 0, 1), hidden, 2 * hidden)};
  return ad::ConcatCols(ends);
}

}  // namespace

Var Discriminator::EncodeVideo(Var features) const {
  return Pool(video_encoder.Forward(features), config_.disc_hidden);
}

Var Discriminator::EncodeSummary(Var masked) const {
  return Pool(summary_encoder.Forward(masked), config_.disc_hidden);
}

Var Discriminator::Score(Var video_repr, Var summary_repr) const {
  const Var pair[] = {video_repr, summary_repr};
  Var x = ad::ConcatCols(pair);
  for (const Linear& layer : head) x = ad::Relu(layer.Forward(x));
  return ad::Sigmoid(output.Forward(x));
}

Var Discriminator::Discriminate(Var features, Var masked) const {
  if (features.value().rows() != masked.value().rows()) {
    throw ShapeError("discriminate: video has " +
                     std::to_string(features.value().rows()) +
                     " frames, summary has " +
                     std::to_string(masked.value().rows()));
  }
  return Score(EncodeVideo(features), EncodeSummary(masked));
}

DiscriminatorScores Discriminator::DiscriminateTriple(Var features, Var real,
                                                      Var generated,
                                                      Var random) const {
  const std::size_t frames = features.value().rows();
  for (const Var* v : {&real, &generated, &random}) {
    if (v->valid() && v->value().rows() != frames) {
      throw ShapeError("discriminate_triple: summary frame count differs from video");
    }
  }
  const Var video = EncodeVideo(features);
  DiscriminatorScores out;
  out.real = Score(video, EncodeSummary(real));
  out.generated = Score(video, EncodeSummary(generated));
  if (random.valid()) out.random = Score(video, EncodeSummary(random));
  return out;
}

ParamRefs Discriminator::Params() {
  ParamRefs out;
  video_encoder.CollectParams(out);
  summary_encoder.CollectParams(out);
  for (Linear& layer : head) layer.CollectParams(out);
  output.CollectParams(out);
  return out;
}

}  // namespace dtrsum
