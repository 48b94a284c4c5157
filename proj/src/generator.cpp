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

#include "dtrsum/generator.hpp"

#include <string>

namespace dtrsum {

using ad::Var;

void ModelConfig::Validate() const {
  if (feature_dim == 0 || hidden == 0 || encoded_dim == 0 || disc_hidden == 0) {
    throw ValidationError("model dimensions must be >= 1");
  }
  for (int h : holes) {
    if (h < 1) throw ValidationError("hole sizes must be >= 1");
  }
  for (std::size_t w : head_widths) {
    if (w == 0) throw ValidationError("discriminator head widths must be >= 1");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    throw ValidationError("dropout rate must lie in [0, 1)");
  }
}

Generator::Generator(const ModelConfig& config, Rng& init_rng)
    : config_(config) {
  config.Validate();
  const std::size_t concat_dim = 2 * config.hidden + config.feature_dim;
  bilstm = BiLstm("generator.bilstm", config.feature_dim, config.hidden, init_rng);
  dtr = DtrNetwork("generator.dtr", config.holes, config.feature_dim, init_rng);
  encoder = Linear("generator.encoder", concat_dim, config.encoded_dim, init_rng);
  scorer = Linear("generator.scorer", concat_dim, 1, init_rng);
}

TemporalFeatures Generator::TemporalEncode(Var features, Mode mode,
                                           std::vector<BatchStats>* stats) const {
  const Tensor& f = features.value();
  if (f.rank() != 2 || f.cols() != config_.feature_dim) {
    throw ShapeError("generator expects T x " +
                     std::to_string(config_.feature_dim) + " features, got " +
                     ShapeString(f.shape()));
  }
  if (f.rows() == 0) throw ShapeError("generator: empty video");
  return {bilstm.Forward(features), dtr.Forward(features, mode, stats).features};
}

namespace {

Var Joined(const TemporalFeatures& t) {
  const Var parts[] = {t.relational, t.temporal};
  return ad::ConcatCols(parts);
}

}  // namespace

Var Generator::EncodeVideo(const TemporalFeatures& temporal) const {
  return encoder.Forward(Joined(temporal));
}

Var Generator::PredictScores(const TemporalFeatures& temporal, Mode mode,
                             Rng* dropout_rng) const {
  Var joined = Joined(temporal);
  if (mode == Mode::kTrain && config_.dropout > 0.0) {
    if (dropout_rng == nullptr) {
      throw ValidationError("training-mode scoring needs a dropout stream");
    }
    joined = ad::Dropout(joined, config_.dropout, *dropout_rng, true);
  }
  return ad::Sigmoid(scorer.Forward(joined));
}

GeneratorOutput Generator::Forward(Var features,
                                   const GeneratorOptions& options) const {
  GeneratorOutput out;
  out.temporal = TemporalEncode(features, options.mode, options.stats);
  out.scores = PredictScores(out.temporal, options.mode, options.dropout_rng);
  if (options.want_encoded || options.mode == Mode::kTrain) {
    out.encoded = EncodeVideo(out.temporal);
  }
  return out;
}

std::vector<double> Generator::Infer(const Tensor& features) const {
  ad::Graph graph(/*grad_enabled=*/false);
  GeneratorOptions options;
  options.want_encoded = false;
  const GeneratorOutput out = Forward(graph.Constant(features), options);
  return out.scores.value().ToVector();
}

ParamRefs Generator::Params() {
  ParamRefs out;
  bilstm.CollectParams(out);
  dtr.CollectParams(out);
  encoder.CollectParams(out);
  scorer.CollectParams(out);
  return out;
}

ParamRefs Generator::Buffers() {
  ParamRefs out;
  dtr.CollectBuffers(out);
  return out;
}

}  // namespace dtrsum
