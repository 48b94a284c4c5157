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
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dtrsum/autodiff.hpp"
#include "dtrsum/checkpoint.hpp"
#include "dtrsum/evaluation.hpp"
#include "dtrsum/io.hpp"
#include "dtrsum/optim.hpp"

namespace dtrsum {

enum class AdversarialMode {
  kThreePlayer,  // real, generated and random pairs
  kTwoPlayer,    // random pair dropped
  kNone,         // generator only, supervised loss
};

const char* ToString(AdversarialMode mode);
AdversarialMode ParseAdversarialMode(const std::string& name);

struct TrainConfig {
  double lr_g = 1e-4;
  double lr_d = 1e-3;
  double tau = 0.5;
  std::size_t shot_len = 1000;
  double shot_overlap = 0.10;
  int g_steps_per_iter = 2;
  int d_steps_per_iter = 1;
  std::size_t epochs = 100;
  std::uint64_t seed = 1;
  AdversarialMode adversarial = AdversarialMode::kThreePlayer;
  bool supervised_loss = true;
  // Global gradient-norm cap; 0 disables clipping.
  double clip_norm = 0.0;
  // Validation F every this many epochs (and after the last); 0 only at the end.
  std::size_t eval_every = 10;
  EvalConfig eval;
  // Split scored for checkpoint selection; falls back to the training
  // split when empty.
  SplitKind validation_split = SplitKind::kTest;
  InitScheme init = InitScheme::kRandom;

  void Validate() const;
};

// ---------------------------------------------------------------------------
// Losses. Scalar versions and graph versions perform the same floating
// point operations in the same order, so they agree bitwise.

// -(d_g - tau d_s - (1 - tau) d_r); minimising it is the discriminator's max.
double DiscriminatorLoss(double d_real, double d_generated, double d_random, double tau);
// d_g - tau d_s - (1 - tau) d_r, minimised by the generator.
double GeneratorAdversarialLoss(double d_real, double d_generated, double d_random,
                                double tau);
// Squared L2 distance between predicted and ground-truth frame scores.
double SupervisedLoss(std::span<const double> predicted, std::span<const double> target);
double GeneratorTotalLoss(double adversarial, double supervised);

namespace losses {
// `d_random` may be invalid: the two-player form d_g - d_s.
ad::Var Adversarial(ad::Var d_real, ad::Var d_generated, ad::Var d_random, double tau);
ad::Var Discriminator(ad::Var d_real, ad::Var d_generated, ad::Var d_random, double tau);
ad::Var Supervised(ad::Var predicted, ad::Var target);
}  // namespace losses

// ---------------------------------------------------------------------------
// Shot sampling

struct Shot {
  std::size_t start = 0;
  std::size_t length = 0;
};

// Window starts spaced shot_len * (1 - overlap) apart such that the whole
// window fits; {0} when the video is no longer than one shot.
std::vector<std::size_t> ShotStarts(std::size_t frames, const TrainConfig& config);
Shot SampleShot(std::size_t frames, const TrainConfig& config, Rng& rng);

struct Batch {
  std::string video_id;
  Tensor features;            // L x D
  std::vector<double> target; // L ground-truth scores
};

Batch MakeBatch(const Video& video, const Shot& shot);

// ---------------------------------------------------------------------------
// Alternating optimisation

struct LossReport {
  std::size_t iteration = 0;
  std::size_t epoch = 0;
  double d_loss = 0.0;
  double g_adv = 0.0;
  double g_summ = 0.0;
  double d_real = 0.0;
  double d_generated = 0.0;
  double d_random = 0.0;
  std::optional<double> val_f;
};

class Trainer {
 public:
  Trainer(ModelBundle& models, const TrainConfig& config);

  // g_steps_per_iter generator updates, then d_steps_per_iter discriminator
  // updates. Each update draws a fresh random summary.
  LossReport Iterate(const Batch& batch);

  // One generator update against the frozen discriminator.
  void GeneratorStep(const Batch& batch, LossReport& report);
  // One discriminator update with generator outputs held constant.
  void DiscriminatorStep(const Batch& batch, LossReport& report);

  const Adam& generator_optimizer() const { return g_opt_; }
  const Adam& discriminator_optimizer() const { return d_opt_; }

 private:
  ModelBundle& models_;
  TrainConfig config_;
  Adam g_opt_;
  Adam d_opt_;
  Rng dropout_rng_;
  Rng random_summary_rng_;
  std::size_t iteration_ = 0;
};

struct VideoEval {
  std::string video_id;
  EvalResult result;
};

// Whole-sequence inference and keyshot evaluation of every video.
std::vector<VideoEval> EvaluateVideos(const Generator& generator,
                                      std::span<const Video* const> videos,
                                      const EvalConfig& config);
double MeanFMeasure(std::span<const VideoEval> evals);

struct EpochSummary {
  std::size_t epoch = 0;
  double d_loss = 0.0;
  double g_adv = 0.0;
  double g_summ = 0.0;
  std::optional<double> val_f;
};

struct TrainResult {
  ModelBundle final_model;
  ModelBundle best_model;
  double best_val_f = -1.0;
  std::vector<LossReport> history;
};

using ProgressCallback = std::function<void(const EpochSummary&)>;

// Epochs over the training split, one sampled shot per video per
// iteration. Validation keeps the best-scoring model.
TrainResult Train(const Dataset& dataset, const ModelConfig& model_config,
                  const TrainConfig& config, const ProgressCallback& progress = {});

// iteration,L_D,L_G_adv,L_summ,d_g,d_s,d_r,val_F
std::string MetricsCsv(std::span<const LossReport> history);

}  // namespace dtrsum
