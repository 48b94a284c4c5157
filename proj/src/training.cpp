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

#include "dtrsum/training.hpp"

#include <cmath>
#include <cstdio>
#include <map>

#include "dtrsum/discriminator.hpp"

namespace dtrsum {

using ad::Var;

const char* ToString(AdversarialMode mode) {
  switch (mode) {
    case AdversarialMode::kThreePlayer: return "three-player";
    case AdversarialMode::kTwoPlayer: return "two-player";
    case AdversarialMode::kNone: return "g-only";
  }
  return "?";
}

AdversarialMode ParseAdversarialMode(const std::string& name) {
  if (name == "three-player") return AdversarialMode::kThreePlayer;
  if (name == "two-player") return AdversarialMode::kTwoPlayer;
  if (name == "g-only") return AdversarialMode::kNone;
  throw ValidationError("unknown adversarial mode '" + name +
                        "' (expected three-player, two-player or g-only)");
}

void TrainConfig::Validate() const {
  if (!(lr_g > 0.0) || !(lr_d > 0.0)) throw ValidationError("learning rates must be positive");
  if (!(tau >= 0.0 && tau <= 1.0)) throw ValidationError("tau must lie in [0, 1]");
  if (shot_len == 0) throw ValidationError("shot length must be >= 1");
  if (!(shot_overlap >= 0.0 && shot_overlap < 1.0)) {
    throw ValidationError("shot overlap must lie in [0, 1)");
  }
  if (g_steps_per_iter < 0 || d_steps_per_iter < 0) {
    throw ValidationError("update counts must be non-negative");
  }
  if (adversarial == AdversarialMode::kNone && !supervised_loss) {
    throw ValidationError("generator-only training needs the supervised loss");
  }
  if (clip_norm < 0.0) throw ValidationError("clip norm must be >= 0");
}

// ---------------------------------------------------------------------------

double GeneratorAdversarialLoss(double d_real, double d_generated, double d_random,
                                double tau) {
  // The fake term is formed first so tau = 0.5 gives exactly their mean.
  return d_real - (tau * d_generated + (1.0 - tau) * d_random);
}

double DiscriminatorLoss(double d_real, double d_generated, double d_random, double tau) {
  return -GeneratorAdversarialLoss(d_real, d_generated, d_random, tau);
}

double SupervisedLoss(std::span<const double> predicted, std::span<const double> target) {
  if (predicted.size() != target.size()) {
    throw ValidationError("supervised loss: " + std::to_string(predicted.size()) +
                          " predictions vs " + std::to_string(target.size()) + " targets");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double d = predicted[i] - target[i];
    acc += d * d;
  }
  return acc;
}

double GeneratorTotalLoss(double adversarial, double supervised) {
  return adversarial + supervised;
}

namespace losses {

Var Adversarial(Var d_real, Var d_generated, Var d_random, double tau) {
  if (!d_random.valid()) return ad::Sub(d_real, d_generated);
  return ad::Sub(d_real,
                 ad::Add(ad::Scale(d_generated, tau), ad::Scale(d_random, 1.0 - tau)));
}

Var Discriminator(Var d_real, Var d_generated, Var d_random, double tau) {
  return ad::Scale(Adversarial(d_real, d_generated, d_random, tau), -1.0);
}

Var Supervised(Var predicted, Var target) {
  return ad::SumSquares(ad::Sub(predicted, target));
}

}  // namespace losses

// ---------------------------------------------------------------------------

std::vector<std::size_t> ShotStarts(std::size_t frames, const TrainConfig& config) {
  if (frames <= config.shot_len) return {0};
  const auto stride = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(static_cast<double>(config.shot_len) *
                                                (1.0 - config.shot_overlap))));
  std::vector<std::size_t> starts;
  for (std::size_t s = 0; s + config.shot_len <= frames; s += stride) starts.push_back(s);
  return starts;
}

Shot SampleShot(std::size_t frames, const TrainConfig& config, Rng& rng) {
  if (frames == 0) throw ValidationError("cannot sample a shot from an empty video");
  if (frames <= config.shot_len) return {0, frames};
  const auto starts = ShotStarts(frames, config);
  return {starts[rng.Below(starts.size())], config.shot_len};
}

Batch MakeBatch(const Video& video, const Shot& shot) {
  Batch b;
  b.video_id = video.id;
  b.features = video.features.RowRange(shot.start, shot.start + shot.length);
  const std::vector<double> target = video.annotation.TargetScores();
  b.target.assign(target.begin() + static_cast<std::ptrdiff_t>(shot.start),
                  target.begin() + static_cast<std::ptrdiff_t>(shot.start + shot.length));
  return b;
}

// ---------------------------------------------------------------------------

Trainer::Trainer(ModelBundle& models, const TrainConfig& config)
    : models_(models),
      config_(config),
      g_opt_(models.generator.Params(), AdamOptions{.learning_rate = config.lr_g}),
      d_opt_(models.discriminator.Params(), AdamOptions{.learning_rate = config.lr_d}),
      dropout_rng_(Rng(config.seed).Fork(RngStream::kDropout)),
      random_summary_rng_(Rng(config.seed).Fork(RngStream::kRandomSummary)) {
  config_.Validate();
}

namespace {

bool UsesDiscriminator(const TrainConfig& c) {
  return c.adversarial != AdversarialMode::kNone;
}

void CheckFinite(double v, const char* what, std::size_t iteration) {
  if (!std::isfinite(v)) {
    throw NumericalError(std::string("non-finite ") + what + " at iteration " +
                         std::to_string(iteration));
  }
}

}  // namespace

void Trainer::GeneratorStep(const Batch& batch, LossReport& report) {
  ParamRefs params = models_.generator.Params();
  ad::Graph graph;
  graph.Train(params);
  const Var features = graph.Constant(batch.features);
  const Var target = graph.Constant(Tensor::Column(batch.target));

  std::vector<BatchStats> stats;
  GeneratorOptions options;
  options.mode = Mode::kTrain;
  options.dropout_rng = &dropout_rng_;
  options.stats = &stats;
  options.want_encoded = UsesDiscriminator(config_);
  const GeneratorOutput out = models_.generator.Forward(features, options);

  Var total;
  report.g_summ = 0.0;
  report.g_adv = 0.0;
  if (config_.supervised_loss) {
    const Var summ = losses::Supervised(out.scores, target);
    report.g_summ = summ.value().item();
    total = summ;
  }
  if (UsesDiscriminator(config_)) {
    Var random;
    if (config_.adversarial == AdversarialMode::kThreePlayer) {
      random = MaskSummary(out.encoded, graph.Constant(Tensor::Column(SampleRandomScores(
                                            batch.features.rows(), random_summary_rng_))));
    }
    const DiscriminatorScores d = models_.discriminator.DiscriminateTriple(
        features, MaskSummary(out.encoded, target), MaskSummary(out.encoded, out.scores),
        random);
    const Var adv = losses::Adversarial(d.real, d.generated, d.random, config_.tau);
    report.g_adv = adv.value().item();
    total = total.valid() ? ad::Add(adv, total) : adv;
  }
  CheckFinite(total.value().item(), "generator loss", iteration_);
  graph.Backward(total);
  if (config_.clip_norm > 0.0) ClipGradNorm(params, config_.clip_norm);
  g_opt_.Step();
  models_.generator.UpdateRunningStats(stats);
}

void Trainer::DiscriminatorStep(const Batch& batch, LossReport& report) {
  Tensor encoded, scores;
  {
    ad::Graph frozen(/*grad_enabled=*/false);
    GeneratorOptions options;
    options.mode = Mode::kTrain;
    options.dropout_rng = &dropout_rng_;
    const GeneratorOutput out =
        models_.generator.Forward(frozen.Constant(batch.features), options);
    encoded = out.encoded.value();
    scores = out.scores.value();
  }

  ad::Graph graph;
  graph.Train(models_.discriminator.Params());
  const Var features = graph.Constant(batch.features);
  const Var fe = graph.Constant(std::move(encoded));
  Var random;
  if (config_.adversarial == AdversarialMode::kThreePlayer) {
    random = MaskSummary(fe, graph.Constant(Tensor::Column(SampleRandomScores(
                                 batch.features.rows(), random_summary_rng_))));
  }
  const DiscriminatorScores d = models_.discriminator.DiscriminateTriple(
      features, MaskSummary(fe, graph.Constant(Tensor::Column(batch.target))),
      MaskSummary(fe, graph.Constant(std::move(scores))), random);
  const Var loss = losses::Discriminator(d.real, d.generated, d.random, config_.tau);
  report.d_loss = loss.value().item();
  report.d_real = d.real.value().item();
  report.d_generated = d.generated.value().item();
  report.d_random = d.random.valid() ? d.random.value().item() : 0.0;
  CheckFinite(report.d_loss, "discriminator loss", iteration_);
  ParamRefs params = models_.discriminator.Params();
  graph.Backward(loss);
  if (config_.clip_norm > 0.0) ClipGradNorm(params, config_.clip_norm);
  d_opt_.Step();
}

LossReport Trainer::Iterate(const Batch& batch) {
  LossReport report;
  report.iteration = iteration_;
  for (int i = 0; i < config_.g_steps_per_iter; ++i) GeneratorStep(batch, report);
  if (UsesDiscriminator(config_)) {
    for (int i = 0; i < config_.d_steps_per_iter; ++i) DiscriminatorStep(batch, report);
  }
  ++iteration_;
  return report;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<VideoEval> EvaluateWithCache(const Generator& generator,
                                         std::span<const Video* const> videos,
                                         const EvalConfig& config,
                                         std::map<std::string, Segmentation>* cache) {
  std::vector<VideoEval> out;
  for (const Video* v : videos) {
    const std::vector<double> scores = generator.Infer(v->features);
    const FrameMask keyframes = v->annotation.KeyframeMask();
    Segmentation seg;
    if (cache != nullptr) {
      auto it = cache->find(v->id);
      if (it == cache->end()) it = cache->emplace(v->id, SegmentForEval(v->features, config)).first;
      seg = it->second;
    } else {
      seg = SegmentForEval(v->features, config);
    }
    out.push_back({v->id, EvaluateVideo(scores, keyframes, seg, config)});
  }
  return out;
}

}  // namespace

std::vector<VideoEval> EvaluateVideos(const Generator& generator,
                                      std::span<const Video* const> videos,
                                      const EvalConfig& config) {
  return EvaluateWithCache(generator, videos, config, nullptr);
}

double MeanFMeasure(std::span<const VideoEval> evals) {
  if (evals.empty()) return 0.0;
  double acc = 0.0;
  for (const VideoEval& e : evals) acc += e.result.f_measure;
  return acc / static_cast<double>(evals.size());
}

TrainResult Train(const Dataset& dataset, const ModelConfig& model_config,
                  const TrainConfig& config, const ProgressCallback& progress) {
  config.Validate();
  model_config.Validate();
  if (dataset.train_ids.empty()) throw ValidationError("training split is empty");
  if (dataset.feature_dim() != model_config.feature_dim) {
    throw ValidationError("dataset feature dim " + std::to_string(dataset.feature_dim()) +
                          " differs from model feature dim " +
                          std::to_string(model_config.feature_dim));
  }

  TrainResult result{ModelBundle::Create(model_config, config.seed, config.init), {}, -1.0, {}};
  result.final_model.tau = config.tau;
  result.best_model = result.final_model;

  const std::vector<const Video*> train_videos = dataset.Split(SplitKind::kTrain);
  std::vector<const Video*> val_videos = dataset.Split(config.validation_split);
  if (val_videos.empty()) val_videos = train_videos;
  std::map<std::string, Segmentation> segment_cache;

  Trainer trainer(result.final_model, config);
  Rng data_rng = Rng(config.seed).Fork(RngStream::kData);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::vector<const Video*> order = train_videos;
    data_rng.Shuffle(order);
    EpochSummary summary;
    summary.epoch = epoch;
    for (const Video* v : order) {
      const Batch batch = MakeBatch(*v, SampleShot(v->frames(), config, data_rng));
      LossReport report = trainer.Iterate(batch);
      report.epoch = epoch;
      summary.d_loss += report.d_loss;
      summary.g_adv += report.g_adv;
      summary.g_summ += report.g_summ;
      result.history.push_back(report);
    }
    const double n = static_cast<double>(order.size());
    summary.d_loss /= n;
    summary.g_adv /= n;
    summary.g_summ /= n;

    const bool last = epoch + 1 == config.epochs;
    if (last || (config.eval_every > 0 && (epoch + 1) % config.eval_every == 0)) {
      const double f = MeanFMeasure(EvaluateWithCache(result.final_model.generator,
                                                      val_videos, config.eval,
                                                      &segment_cache));
      summary.val_f = f;
      result.history.back().val_f = f;
      if (f > result.best_val_f) {
        result.best_val_f = f;
        result.best_model = result.final_model;
      }
    }
    if (progress) progress(summary);
  }
  return result;
}

std::string MetricsCsv(std::span<const LossReport> history) {
  std::string out = "iteration,L_D,L_G_adv,L_summ,d_g,d_s,d_r,val_F\n";
  char buf[512];
  for (const LossReport& r : history) {
    std::snprintf(buf, sizeof(buf), "%zu,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,", r.iteration,
                  r.d_loss, r.g_adv, r.g_summ, r.d_real, r.d_generated, r.d_random);
    out += buf;
    if (r.val_f) {
      std::snprintf(buf, sizeof(buf), "%.10g", *r.val_f);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

}  // namespace dtrsum
