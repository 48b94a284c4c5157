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

#include "dtrsum/model_gradcheck.hpp"

#include <sstream>

#include "dtrsum/checkpoint.hpp"
#include "dtrsum/discriminator.hpp"
#include "dtrsum/training.hpp"

namespace dtrsum {

ToyDims ParseToyDims(const std::string& text) {
  ToyDims dims;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("dims entry '" + item + "' is not key=value");
    }
    const std::string key = item.substr(0, eq);
    std::size_t value = 0;
    try {
      std::size_t used = 0;
      value = std::stoul(item.substr(eq + 1), &used);
      if (used != item.size() - eq - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ValidationError("dims entry '" + item + "' has a non-integer value");
    }
    if (value == 0) throw ValidationError("dims entry '" + item + "' must be positive");
    if (key == "D") dims.feature_dim = value;
    else if (key == "H") dims.hidden = value;
    else if (key == "De") dims.encoded_dim = value;
    else if (key == "Hd") dims.disc_hidden = value;
    else if (key == "T") dims.frames = value;
    else throw ValidationError("unknown dims key '" + key + "' (expected D, H, De, Hd, T)");
  }
  return dims;
}

ModelGradCheck CheckModelGradients(const ToyDims& dims, const HoleSet& holes,
                                   const GradCheckOptions& options, std::uint64_t seed) {
  ModelConfig config;
  config.feature_dim = dims.feature_dim;
  config.hidden = dims.hidden;
  config.encoded_dim = dims.encoded_dim;
  config.disc_hidden = dims.disc_hidden;
  config.holes = holes;
  config.dropout = 0.0;
  ModelBundle models = ModelBundle::Create(config, seed);

  Rng data = Rng(seed).Fork(RngStream::kData);
  Tensor features = Tensor::Matrix(dims.frames, dims.feature_dim);
  for (double& v : features.values()) v = data.Normal();
  std::vector<double> target(dims.frames, 0.0);
  for (std::size_t t = 0; t < dims.frames; t += 2) target[t] = 1.0;
  Rng random_rng = Rng(seed).Fork(RngStream::kRandomSummary);
  const Tensor random = Tensor::Column(SampleRandomScores(dims.frames, random_rng));
  const double tau = 0.5;

  struct Pieces {
    ad::Var scores, target, d_real, d_generated, d_random;
  };
  auto forward = [&](ad::Graph& g) {
    GeneratorOptions opts;
    opts.mode = Mode::kTrain;
    const ad::Var f = g.Constant(features);
    const GeneratorOutput out = models.generator.Forward(f, opts);
    Pieces p;
    p.scores = out.scores;
    p.target = g.Constant(Tensor::Column(target));
    const DiscriminatorScores d = models.discriminator.DiscriminateTriple(
        f, MaskSummary(out.encoded, p.target), MaskSummary(out.encoded, out.scores),
        MaskSummary(out.encoded, g.Constant(random)));
    p.d_real = d.real;
    p.d_generated = d.generated;
    p.d_random = d.random;
    return p;
  };

  const ParamRefs g_params = models.generator.Params();
  const ParamRefs d_params = models.discriminator.Params();
  ParamRefs all = g_params;
  all.insert(all.end(), d_params.begin(), d_params.end());

  ModelGradCheck result;
  auto run = [&](const std::string& name, const LossBuilder& build, const ParamRefs& params) {
    LossCheck check{name, GradCheck(build, params, options)};
    result.passed = result.passed && check.report.passed;
    result.losses.push_back(std::move(check));
  };

  run("discriminator", [&](ad::Graph& g) {
    const Pieces p = forward(g);
    return losses::Discriminator(p.d_real, p.d_generated, p.d_random, tau);
  }, all);
  run("generator_adversarial", [&](ad::Graph& g) {
    const Pieces p = forward(g);
    return losses::Adversarial(p.d_real, p.d_generated, p.d_random, tau);
  }, g_params);
  run("supervised", [&](ad::Graph& g) {
    const Pieces p = forward(g);
    return losses::Supervised(p.scores, p.target);
  }, g_params);
  run("generator_total", [&](ad::Graph& g) {
    const Pieces p = forward(g);
    return ad::Add(losses::Adversarial(p.d_real, p.d_generated, p.d_random, tau),
                   losses::Supervised(p.scores, p.target));
  }, g_params);
  return result;
}

}  // namespace dtrsum
