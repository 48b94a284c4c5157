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

#include <doctest.h>

#include <cmath>
#include <limits>

#include "dtrsum/checkpoint.hpp"
#include "dtrsum/discriminator.hpp"
#include "dtrsum/synth.hpp"
#include "dtrsum/training.hpp"
#include "test_util.hpp"

using namespace dtrsum;
using dtrsum::testing::RandomMatrix;

namespace {

ModelConfig Toy() {
  ModelConfig c;
  c.feature_dim = 4;
  c.hidden = 4;
  c.encoded_dim = 4;
  c.disc_hidden = 3;
  c.head_widths = {16, 8, 4};
  return c;
}

Batch ToyBatch(std::uint64_t seed, std::size_t frames = 12) {
  Rng rng(seed);
  Batch b;
  b.video_id = "toy";
  b.features = RandomMatrix(rng, frames, 4);
  b.target.assign(frames, 0.0);
  for (std::size_t t = 0; t < frames; t += 3) b.target[t] = 1.0;
  return b;
}

std::vector<Tensor> Snapshot(const ParamRefs& params) {
  std::vector<Tensor> out;
  for (const Parameter* p : params) out.push_back(p->value);
  return out;
}

}  // namespace

TEST_CASE("adversarial losses") {
  for (double tau : {0.0, 0.5, 1.0}) {
    for (double c : {0.1, 0.5, 0.9}) CHECK(DiscriminatorLoss(c, c, c, tau) == 0.0);
  }
  // Other weights round tau * c + (1 - tau) * c.
  for (double c : {0.1, 0.5, 0.9}) CHECK(std::abs(DiscriminatorLoss(c, c, c, 0.3)) < 1e-15);
  CHECK(DiscriminatorLoss(1.0, 0.0, 0.0, 0.5) == -1.0);
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double g = rng.Uniform(), s = rng.Uniform(), r = rng.Uniform(), tau = rng.Uniform();
    CHECK(GeneratorAdversarialLoss(g, s, r, tau) == -DiscriminatorLoss(g, s, r, tau));
    CHECK(0.5 * s + (1.0 - 0.5) * r == (s + r) / 2.0);
    CHECK(GeneratorAdversarialLoss(g, s, r, 0.5) == g - (s + r) / 2.0);
    CHECK(GeneratorAdversarialLoss(g, s, r, 1.0) == g - s);
    CHECK(std::abs(DiscriminatorLoss(g, s, r, tau)) <= 1.0);
  }
}

TEST_CASE("graph losses agree with scalar losses bitwise") {
  Rng rng(2);
  for (int i = 0; i < 50; ++i) {
    const double g = rng.Uniform(), s = rng.Uniform(), r = rng.Uniform(), tau = rng.Uniform();
    ad::Graph graph(false);
    const ad::Var vg = graph.Constant(Tensor::Scalar(g));
    const ad::Var vs = graph.Constant(Tensor::Scalar(s));
    const ad::Var vr = graph.Constant(Tensor::Scalar(r));
    CHECK(losses::Adversarial(vg, vs, vr, tau).value().item() ==
          GeneratorAdversarialLoss(g, s, r, tau));
    CHECK(losses::Discriminator(vg, vs, vr, tau).value().item() ==
          DiscriminatorLoss(g, s, r, tau));
    CHECK(losses::Adversarial(vg, vs, ad::Var(), tau).value().item() == g - s);
  }
  const std::vector<double> p{0.2, 0.9, 0.4}, q{1.0, 0.0, 0.5};
  ad::Graph graph(false);
  CHECK(losses::Supervised(graph.Constant(Tensor::Column(p)), graph.Constant(Tensor::Column(q)))
            .value()
            .item() == SupervisedLoss(p, q));
}

TEST_CASE("supervised and total losses") {
  const std::vector<double> a{0.3, 0.7};
  CHECK(SupervisedLoss(a, a) == 0.0);
  CHECK(SupervisedLoss(std::vector<double>{1, 0}, std::vector<double>{0, 0}) == 1.0);
  CHECK(SupervisedLoss(std::vector<double>{0.5, 0.5}, std::vector<double>{1, 0}) == 0.5);
  CHECK_THROWS_AS(SupervisedLoss(a, std::vector<double>{1.0}), ValidationError);
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> x(5), y(5);
    for (auto& v : x) v = rng.Uniform();
    for (auto& v : y) v = rng.Uniform();
    CHECK(SupervisedLoss(x, y) > 0.0);
  }
  CHECK(GeneratorTotalLoss(0.0, 0.0) == 0.0);
  CHECK(GeneratorTotalLoss(-1.0, 0.5) == -0.5);
}

TEST_CASE("shot sampling") {
  TrainConfig cfg;
  CHECK(ShotStarts(500, cfg) == std::vector<std::size_t>{0});
  CHECK(ShotStarts(1900, cfg) == std::vector<std::size_t>{0, 900});
  CHECK(ShotStarts(1000, cfg) == std::vector<std::size_t>{0});
  CHECK(ShotStarts(2800, cfg) == std::vector<std::size_t>{0, 900, 1800});
  Rng rng(1);
  const Shot whole = SampleShot(500, cfg, rng);
  CHECK(whole.start == 0);
  CHECK(whole.length == 500);
  Rng a(9), b(9);
  for (int i = 0; i < 20; ++i) {
    const Shot x = SampleShot(5000, cfg, a), y = SampleShot(5000, cfg, b);
    CHECK(x.start == y.start);
    CHECK(x.length == 1000);
    CHECK(x.start % 900 == 0);
    CHECK(x.start + x.length <= 5000);
  }
  CHECK_THROWS_AS(SampleShot(0, cfg, rng), ValidationError);

  Video v;
  v.id = "v";
  v.features = RandomMatrix(rng, 30, 2);
  v.annotation.video_id = "v";
  v.annotation.num_frames = 30;
  v.annotation.keyframes = {3, 12, 13, 29};
  const Batch batch = MakeBatch(v, {10, 5});
  CHECK(batch.features == v.features.RowRange(10, 15));
  CHECK(batch.target == std::vector<double>{0, 0, 1, 1, 0});
}

TEST_CASE("config validation") {
  TrainConfig c;
  CHECK_NOTHROW(c.Validate());
  c.tau = 1.5;
  CHECK_THROWS_AS(c.Validate(), ValidationError);
  c = {};
  c.shot_overlap = 1.0;
  CHECK_THROWS_AS(c.Validate(), ValidationError);
  c = {};
  c.lr_g = 0.0;
  CHECK_THROWS_AS(c.Validate(), ValidationError);
  c = {};
  c.adversarial = AdversarialMode::kNone;
  c.supervised_loss = false;
  CHECK_THROWS_AS(c.Validate(), ValidationError);
  CHECK(ParseAdversarialMode("two-player") == AdversarialMode::kTwoPlayer);
  CHECK(std::string(ToString(AdversarialMode::kNone)) == "g-only");
  CHECK_THROWS_AS(ParseAdversarialMode("four-player"), ValidationError);
}

TEST_CASE("update isolation") {
  ModelBundle models = ModelBundle::Create(Toy(), 4);
  TrainConfig cfg;
  Trainer trainer(models, cfg);
  const Batch batch = ToyBatch(5);
  LossReport report;

  const auto d_before = Snapshot(models.discriminator.Params());
  const auto g_before = Snapshot(models.generator.Params());
  trainer.GeneratorStep(batch, report);
  CHECK(Snapshot(models.discriminator.Params()) == d_before);
  const auto g_after_one = Snapshot(models.generator.Params());
  CHECK_FALSE(g_after_one == g_before);
  trainer.GeneratorStep(batch, report);
  CHECK_FALSE(Snapshot(models.generator.Params()) == g_after_one);

  const auto g_mid = Snapshot(models.generator.Params());
  const auto buffers_mid = Snapshot(models.generator.Buffers());
  trainer.DiscriminatorStep(batch, report);
  CHECK(Snapshot(models.generator.Params()) == g_mid);
  CHECK(Snapshot(models.generator.Buffers()) == buffers_mid);
  CHECK_FALSE(Snapshot(models.discriminator.Params()) == d_before);
  CHECK(trainer.generator_optimizer().step_count() == 2);
  CHECK(trainer.discriminator_optimizer().step_count() == 1);
}

TEST_CASE("iteration schedule and reports") {
  ModelBundle models = ModelBundle::Create(Toy(), 4);
  TrainConfig cfg;
  Trainer trainer(models, cfg);
  const LossReport r = trainer.Iterate(ToyBatch(6));
  CHECK(trainer.generator_optimizer().step_count() == 2);
  CHECK(trainer.discriminator_optimizer().step_count() == 1);
  CHECK(r.d_loss == DiscriminatorLoss(r.d_real, r.d_generated, r.d_random, cfg.tau));
  for (double v : {r.d_loss, r.g_adv, r.g_summ, r.d_real, r.d_generated, r.d_random}) {
    CHECK(std::isfinite(v));
  }
  CHECK(r.g_summ > 0.0);

  ModelBundle only = ModelBundle::Create(Toy(), 4);
  cfg.adversarial = AdversarialMode::kNone;
  Trainer g_only(only, cfg);
  const auto d_before = Snapshot(only.discriminator.Params());
  const LossReport s = g_only.Iterate(ToyBatch(6));
  CHECK(g_only.discriminator_optimizer().step_count() == 0);
  CHECK(Snapshot(only.discriminator.Params()) == d_before);
  CHECK(s.d_loss == 0.0);
  CHECK(s.g_adv == 0.0);
}

TEST_CASE("adversarial gradient reaches the video encoder through every pair") {
  ModelConfig c = Toy();
  c.dropout = 0.0;
  ModelBundle models = ModelBundle::Create(c, 7);
  const Batch batch = ToyBatch(8);
  Rng rng(1);
  const Tensor random = Tensor::Column(SampleRandomScores(batch.features.rows(), rng));
  Parameter& w = models.generator.encoder.weight;
  // Central differences of each discriminator score with respect to the
  // encoder weights.
  auto score = [&](int which) {
    ad::Graph g(false);
    GeneratorOptions opts;
    opts.mode = Mode::kTrain;
    const ad::Var f = g.Constant(batch.features);
    const GeneratorOutput out = models.generator.Forward(f, opts);
    const DiscriminatorScores d = models.discriminator.DiscriminateTriple(
        f, MaskSummary(out.encoded, g.Constant(Tensor::Column(batch.target))),
        MaskSummary(out.encoded, out.scores), MaskSummary(out.encoded, g.Constant(random)));
    return (which == 0 ? d.real : which == 1 ? d.generated : d.random).value().item();
  };
  for (int which = 0; which < 3; ++which) {
    double norm = 0.0;
    for (std::size_t i = 0; i < w.value.size(); ++i) {
      const double orig = w.value[i];
      w.value[i] = orig + 1e-5;
      const double plus = score(which);
      w.value[i] = orig - 1e-5;
      const double minus = score(which);
      w.value[i] = orig;
      norm += std::abs(plus - minus);
    }
    CAPTURE(which);
    CHECK(norm > 1e-9);
  }
}

TEST_CASE("generator total loss falls against a frozen discriminator") {
  ModelConfig c = Toy();
  c.dropout = 0.0;
  ModelBundle models = ModelBundle::Create(c, 9);
  TrainConfig cfg;
  cfg.lr_g = 1e-3;
  Trainer trainer(models, cfg);
  const Batch batch = ToyBatch(10, 16);
  const auto d_before = Snapshot(models.discriminator.Params());
  std::vector<double> totals;
  for (int i = 0; i < 50; ++i) {
    LossReport r;
    trainer.GeneratorStep(batch, r);
    totals.push_back(r.g_adv + r.g_summ);
  }
  CHECK(totals.back() < totals.front());
  CHECK(Snapshot(models.discriminator.Params()) == d_before);
}

TEST_CASE("non-finite values abort training") {
  ModelBundle models = ModelBundle::Create(Toy(), 4);
  Trainer trainer(models, TrainConfig{});
  Batch batch = ToyBatch(3);
  batch.features(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(trainer.Iterate(batch), NumericalError);
}

TEST_CASE("training runs") {
  SyntheticSpec spec;
  spec.videos = 4;
  spec.min_frames = 40;
  spec.max_frames = 60;
  spec.feature_dim = 4;
  spec.segments = 6;
  const Dataset data = SyntheticDataset(spec);
  ModelConfig model = Toy();
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.eval_every = 1;

  SUBCASE("zero epochs return the initial model") {
    cfg.epochs = 0;
    TrainResult r = Train(data, model, cfg);
    ModelBundle init = ModelBundle::Create(model, cfg.seed);
    CHECK(EncodeCheckpoint(r.final_model) == EncodeCheckpoint(init));
    CHECK(EncodeCheckpoint(r.best_model) == EncodeCheckpoint(init));
    CHECK(r.history.empty());
  }
  SUBCASE("identical seeds give identical histories and checkpoints") {
    TrainResult a = Train(data, model, cfg);
    TrainResult b = Train(data, model, cfg);
    CHECK(MetricsCsv(a.history) == MetricsCsv(b.history));
    CHECK(EncodeCheckpoint(a.final_model) == EncodeCheckpoint(b.final_model));
    CHECK(EncodeCheckpoint(a.best_model) == EncodeCheckpoint(b.best_model));
    CHECK(a.history.size() == 3 * data.train_ids.size());
    cfg.seed = 2;
    TrainResult c = Train(data, model, cfg);
    CHECK_FALSE(MetricsCsv(a.history) == MetricsCsv(c.history));
  }
  SUBCASE("progress and validation") {
    std::vector<EpochSummary> seen;
    TrainResult r = Train(data, model, cfg, [&](const EpochSummary& s) { seen.push_back(s); });
    REQUIRE(seen.size() == 3);
    for (const EpochSummary& s : seen) CHECK(s.val_f.has_value());
    CHECK(r.best_val_f >= 0.0);
    CHECK(r.history.back().val_f.has_value());
  }
  SUBCASE("feature dimension must match") {
    model.feature_dim = 5;
    CHECK_THROWS_AS(Train(data, model, cfg), ValidationError);
  }
}

TEST_CASE("discriminator separates ground truth from generated summaries early on") {
  const Dataset data = SyntheticDataset(SyntheticSpec{});
  TrainConfig cfg;
  cfg.epochs = (200 + data.train_ids.size() - 1) / data.train_ids.size();
  cfg.eval_every = 0;
  const TrainResult r = Train(data, ModelConfig{}, cfg);
  double gap = 0.0;
  for (std::size_t i = 0; i < 200; ++i) gap += r.history[i].d_real - r.history[i].d_generated;
  CHECK(gap / 200.0 > 0.0);
}

TEST_CASE("metrics csv") {
  LossReport r;
  r.iteration = 3;
  r.d_loss = -0.5;
  r.val_f = 75.0;
  const std::string csv = MetricsCsv(std::vector<LossReport>{r});
  CHECK(csv.rfind("iteration,L_D,L_G_adv,L_summ,d_g,d_s,d_r,val_F\n", 0) == 0);
  CHECK(csv.find("3,-0.5,0,0,0,0,0,75\n") != std::string::npos);
}
