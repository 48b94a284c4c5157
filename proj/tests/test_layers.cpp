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

#include "dtrsum/gradcheck.hpp"
#include "dtrsum/layers.hpp"
#include "test_util.hpp"

using namespace dtrsum;
using dtrsum::testing::RandomMatrix;

namespace {

Tensor Run(const DtrUnit& unit, const Tensor& x) {
  ad::Graph g(false);
  return unit.Forward(g.Constant(x)).value();
}

Tensor Run(const DtrLayer& layer, const Tensor& x, Mode mode) {
  ad::Graph g(false);
  return layer.Forward(g.Constant(x), mode).value();
}

Tensor Run(const DtrNetwork& net, const Tensor& x, Mode mode) {
  ad::Graph g(false);
  return net.Forward(g.Constant(x), mode).features.value();
}

Tensor Run(const Lstm& lstm, const Tensor& x, Direction dir) {
  ad::Graph g(false);
  return lstm.Forward(g.Constant(x), dir).value();
}

Tensor Run(const BiLstm& bi, const Tensor& x) {
  ad::Graph g(false);
  return bi.Forward(g.Constant(x)).value();
}

bool RowEqual(const Tensor& a, const Tensor& b, std::size_t r) {
  for (std::size_t c = 0; c < a.cols(); ++c) {
    if (a(r, c) != b(r, c)) return false;
  }
  return true;
}

Tensor Reversed(const Tensor& x) {
  Tensor out = x;
  for (std::size_t t = 0; t < x.rows(); ++t) {
    for (std::size_t c = 0; c < x.cols(); ++c) out(t, c) = x(x.rows() - 1 - t, c);
  }
  return out;
}

void ZeroAll(ParamRefs params) {
  for (Parameter* p : params) p->value.Fill(0.0);
}

}  // namespace

TEST_CASE("time span and receptive field formulas") {
  CHECK(TimeSpan(1) == 3);
  CHECK(TimeSpan(16) == 33);
  CHECK(TimeSpan(64) == 129);
  CHECK_THROWS_AS(TimeSpan(0), ValidationError);
  CHECK(ReceptiveField(1, 3, 1) == 3);
  CHECK(ReceptiveField(64, 3, 3) == 385);
  for (int h = 1; h <= 128; ++h) {
    for (int j = 1; j <= 3; ++j) {
      CHECK(ReceptiveField(h, 1, j) == 1);
      CHECK(ReceptiveField(h, 3, j) == 2 * h * j + 1);
    }
  }
  CHECK_THROWS_AS(ReceptiveField(1, 0, 1), ValidationError);
  CHECK_THROWS_AS(ReceptiveField(1, 3, 0), ValidationError);
}

TEST_CASE("dtr unit convolution") {
  Rng rng(1);
  SUBCASE("hand-computed taps") {
    DtrUnit unit("u", 1, 1, 1, rng);
    unit.weight.value = Tensor({3, 1}, {2.0, 3.0, 5.0});
    unit.bias.value = Tensor::Scalar(0.5);
    const Tensor y = Run(unit, Tensor({3, 1}, {1.0, 10.0, 100.0}));
    CHECK(y(1, 0) == 2.0 * 1.0 + 3.0 * 10.0 + 5.0 * 100.0 + 0.5);
    CHECK(y(0, 0) == 3.0 * 1.0 + 5.0 * 10.0 + 0.5);
    CHECK(y(2, 0) == 2.0 * 10.0 + 3.0 * 100.0 + 0.5);
  }
  SUBCASE("single frame sees only the centre tap") {
    DtrUnit unit("u", 16, 2, 3, rng);
    const Tensor x = RandomMatrix(rng, 1, 2);
    const Tensor y = Run(unit, x);
    for (std::size_t c = 0; c < 3; ++c) {
      const double expect = unit.bias.value[c] + x[0] * unit.weight.value(2, c) +
                            x[1] * unit.weight.value(3, c);
      CHECK(y(0, c) == doctest::Approx(expect).epsilon(1e-14));
    }
  }
  SUBCASE("identity kernel passes input through") {
    DtrUnit unit("u", 4, 3, 3, rng);
    unit.weight.value.Fill(0.0);
    for (std::size_t c = 0; c < 3; ++c) unit.weight.value(3 + c, c) = 1.0;
    const Tensor x = RandomMatrix(rng, 9, 3);
    CHECK(Run(unit, x) == x);
  }
  SUBCASE("output row t is bitwise invariant outside its taps") {
    const int hole = 4;
    DtrUnit unit("u", hole, 2, 2, rng);
    const Tensor x = RandomMatrix(rng, 20, 2);
    const Tensor base = Run(unit, x);
    for (std::size_t p = 0; p < 20; ++p) {
      Tensor y = x;
      y(p, 0) += 0.75;
      const Tensor out = Run(unit, y);
      for (std::size_t t = 0; t < 20; ++t) {
        const long d = static_cast<long>(p) - static_cast<long>(t);
        const bool tap = d == 0 || d == hole || d == -hole;
        CHECK(RowEqual(out, base, t) == !tap);
      }
    }
  }
  CHECK_THROWS_AS(DtrUnit("u", 0, 2, 2, rng), ValidationError);
}

TEST_CASE("dtr layer") {
  Rng rng(2);
  DtrLayer layer("l", kDefaultHoles, 2, rng);
  const Tensor x = RandomMatrix(rng, 6, 2);
  SUBCASE("zero units with unit scale and zero shift give zeros") {
    for (DtrUnit& u : layer.units) {
      u.weight.value.Fill(0.0);
      u.bias.value.Fill(0.0);
    }
    CHECK(Run(layer, x, Mode::kTrain) == Tensor::Matrix(6, 2));
    CHECK(Run(layer, x, Mode::kInfer) == Tensor::Matrix(6, 2));
    layer.beta.value.Fill(-1.0);
    CHECK(Run(layer, x, Mode::kTrain) == Tensor::Matrix(6, 2));
    layer.beta.value.Fill(1.0);
    CHECK(Run(layer, x, Mode::kTrain) == Tensor::Matrix(6, 2, 1.0));
    CHECK(Run(layer, x, Mode::kInfer) == Tensor::Matrix(6, 2, 1.0));
  }
  SUBCASE("row t responds exactly to its tap frames") {
    // A large shift keeps every unit in the linear part of the relu.
    layer.beta.value.Fill(50.0);
    const Tensor base = Run(layer, x, Mode::kInfer);
    for (std::size_t p = 0; p < 6; ++p) {
      Tensor y = x;
      y(p, 1) -= 1.3;
      const Tensor out = Run(layer, y, Mode::kInfer);
      for (std::size_t t = 0; t < 6; ++t) {
        const long d = std::labs(static_cast<long>(p) - static_cast<long>(t));
        const bool tap = d == 0 || d == 1 || d == 4 || d == 16 || d == 64;
        CHECK(RowEqual(out, base, t) == !tap);
      }
    }
  }
  SUBCASE("train-mode batch norm centres on beta with spread gamma") {
    Rng r(8);
    layer.gamma.value = RandomMatrix(r, 1, 2);
    layer.beta.value = RandomMatrix(r, 1, 2);
    const Tensor input = RandomMatrix(r, 40, 2);
    ad::Graph g(false);
    // Check the normalisation on the pre-activation sum of the units.
    const ad::Var f = g.Constant(input);
    std::vector<ad::Var> parts;
    for (const DtrUnit& u : layer.units) parts.push_back(u.Forward(f));
    ad::Var sum = parts[0];
    for (std::size_t i = 1; i < parts.size(); ++i) sum = ad::Add(sum, parts[i]);
    const Tensor bn = ad::BatchNormTrain(sum, g.Param(layer.gamma), g.Param(layer.beta),
                                         DtrLayer::kEpsilon)
                          .value();
    for (std::size_t c = 0; c < 2; ++c) {
      double mean = 0.0, var = 0.0;
      for (std::size_t t = 0; t < 40; ++t) mean += bn(t, c);
      mean /= 40.0;
      for (std::size_t t = 0; t < 40; ++t) var += (bn(t, c) - mean) * (bn(t, c) - mean);
      var /= 40.0;
      CHECK(std::abs(mean - layer.beta.value[c]) < 1e-6);
      CHECK(std::abs(var - layer.gamma.value[c] * layer.gamma.value[c]) < 1e-6);
    }
  }
  SUBCASE("running statistics follow momentum") {
    BatchStats stats;
    ad::Graph g(false);
    layer.Forward(g.Constant(x), Mode::kTrain, &stats);
    const Tensor before = layer.running_mean.value;
    layer.UpdateRunningStats(stats);
    for (std::size_t c = 0; c < 2; ++c) {
      CHECK(layer.running_mean.value[c] ==
            doctest::Approx(0.9 * before[c] + 0.1 * stats.mean[c]).epsilon(1e-14));
    }
  }
  SUBCASE("single frame in training mode skips normalisation") {
    layer.gamma.value.Fill(2.0);
    layer.beta.value.Fill(0.25);
    const Tensor one = RandomMatrix(rng, 1, 2);
    ad::Graph g(false);
    const ad::Var f = g.Constant(one);
    Tensor pre = Tensor::Matrix(1, 2);
    for (const DtrUnit& u : layer.units) {
      const Tensor v = u.Forward(f).value();
      for (std::size_t c = 0; c < 2; ++c) pre[c] += v[c];
    }
    const Tensor y = Run(layer, one, Mode::kTrain);
    for (std::size_t c = 0; c < 2; ++c) {
      CHECK(y[c] == doctest::Approx(std::max(0.0, 2.0 * pre[c] + 0.25)).epsilon(1e-14));
    }
  }
  CHECK_THROWS_AS(Run(layer, Tensor::Matrix(0, 2), Mode::kInfer), ShapeError);
}

TEST_CASE("dtr network") {
  Rng rng(3);
  SUBCASE("identity configuration is a relu passthrough") {
    DtrNetwork net("n", kDefaultHoles, 3, rng);
    for (DtrLayer& layer : net.layers) {
      layer.bypass_batch_norm = true;
      for (DtrUnit& u : layer.units) {
        u.weight.value.Fill(0.0);
        u.bias.value.Fill(0.0);
      }
      for (std::size_t c = 0; c < 3; ++c) layer.units[0].weight.value(3 + c, c) = 1.0;
    }
    const Tensor x = RandomMatrix(rng, 12, 3);
    Tensor expect = x;
    for (double& v : expect.values()) v = std::max(0.0, v);
    CHECK(Run(net, x, Mode::kTrain) == expect);
    ad::Graph g(false);
    const auto out = net.Forward(g.Constant(x), Mode::kInfer);
    CHECK(out.per_layer.size() == 3);
    CHECK(out.per_layer[0].value() == expect);
  }
  SUBCASE("holes are configurable") {
    DtrNetwork net("n", kLongRangeHoles, 2, rng);
    CHECK(net.holes() == kLongRangeHoles);
    CHECK(net.layers.size() == static_cast<std::size_t>(kDtrLayers));
  }
  SUBCASE("long sequence in a single pass") {
    DtrNetwork net("n", kDefaultHoles, 8, rng);
    const Tensor x = RandomMatrix(rng, 2000, 8);
    const Tensor y = Run(net, x, Mode::kInfer);
    CHECK(y.rows() == 2000);
    CHECK(y.cols() == 8);
    CHECK(y.AllFinite());
  }
}

TEST_CASE("layer gradients") {
  Rng rng(4);
  DtrLayer layer("l", kShortRangeHoles, 3, rng);
  layer.beta.value = Tensor({1, 3}, {0.4, 0.6, 0.8});
  const Tensor x = RandomMatrix(rng, 7, 3);
  ParamRefs params;
  layer.CollectParams(params);
  for (Mode mode : {Mode::kTrain, Mode::kInfer}) {
    const auto report = GradCheck(
        [&](ad::Graph& g) { return ad::SumSquares(layer.Forward(g.Constant(x), mode)); },
        params);
    CHECK(report.passed);
  }
  BiLstm bi("b", 3, 4, rng);
  ParamRefs lstm_params;
  bi.CollectParams(lstm_params);
  CHECK(GradCheck([&](ad::Graph& g) { return ad::SumSquares(bi.Forward(g.Constant(x))); },
                  lstm_params)
            .passed);
}

TEST_CASE("lstm") {
  Rng rng(5);
  SUBCASE("zero parameters give zero states") {
    Lstm lstm("l", 3, 4, rng);
    ZeroAll({&lstm.w_input, &lstm.w_recurrent, &lstm.bias});
    const Tensor x = RandomMatrix(rng, 5, 3);
    CHECK(Run(lstm, x, Direction::kForward) == Tensor::Matrix(5, 4));
    BiLstm bi("b", 3, 2, rng);
    ParamRefs ps;
    bi.CollectParams(ps);
    ZeroAll(ps);
    CHECK(Run(bi, x) == Tensor::Matrix(5, 4));
  }
  SUBCASE("initialisation") {
    Lstm lstm("l", 3, 4, rng);
    for (std::size_t j = 0; j < 16; ++j) {
      CHECK(lstm.bias.value[j] == ((j >= 4 && j < 8) ? 1.0 : 0.0));
    }
    for (double v : lstm.w_input.value.values()) CHECK(std::abs(v) <= 0.5);
    for (double v : lstm.w_recurrent.value.values()) CHECK(std::abs(v) <= 0.5);
  }
  SUBCASE("scalar cell matches a hand simulation") {
    Lstm lstm("l", 1, 1, rng);
    // Gate order: input, forget, output, candidate.
    lstm.w_input.value = Tensor({1, 4}, {0.5, -0.3, 0.8, 1.1});
    lstm.w_recurrent.value = Tensor({1, 4}, {0.2, 0.4, -0.6, 0.7});
    lstm.bias.value = Tensor({1, 4}, {0.1, 1.0, -0.2, 0.05});
    const double xs[] = {0.7, -1.2, 2.0};
    const Tensor y = Run(lstm, Tensor({3, 1}, {xs[0], xs[1], xs[2]}), Direction::kForward);
    auto sig = [](double z) { return 1.0 / (1.0 + std::exp(-z)); };
    double h = 0.0, c = 0.0;
    for (int t = 0; t < 3; ++t) {
      const double i = sig(0.5 * xs[t] + 0.2 * h + 0.1);
      const double f = sig(-0.3 * xs[t] + 0.4 * h + 1.0);
      const double o = sig(0.8 * xs[t] - 0.6 * h - 0.2);
      const double g = std::tanh(1.1 * xs[t] + 0.7 * h + 0.05);
      c = f * c + i * g;
      h = o * std::tanh(c);
      CHECK(std::abs(y(t, 0) - h) < 1e-12);
    }
  }
  SUBCASE("backward direction is the forward recurrence on reversed input") {
    Lstm lstm("l", 3, 4, rng);
    const Tensor x = RandomMatrix(rng, 6, 3);
    CHECK(Run(lstm, x, Direction::kBackward) == Reversed(Run(lstm, Reversed(x), Direction::kForward)));
  }
  SUBCASE("bi-lstm is the concatenation of its two directions") {
    BiLstm bi("b", 3, 2, rng);
    const Tensor x = RandomMatrix(rng, 4, 3);
    const Tensor y = Run(bi, x);
    const Tensor f = Run(bi.forward, x, Direction::kForward);
    const Tensor b = Run(bi.backward, x, Direction::kBackward);
    for (std::size_t t = 0; t < 4; ++t) {
      for (std::size_t c = 0; c < 2; ++c) {
        CHECK(y(t, c) == f(t, c));
        CHECK(y(t, 2 + c) == b(t, c));
      }
    }
  }
  SUBCASE("each direction is causal in its own time order") {
    for (int trial = 0; trial < 100; ++trial) {
      Rng r(1000 + trial);
      BiLstm bi("b", 2, 3, r);
      const std::size_t steps = 2 + r.Below(7);
      const Tensor x = RandomMatrix(r, steps, 2);
      const std::size_t p = r.Below(steps);
      Tensor y = x;
      y(p, r.Below(2)) += 1.0 + r.Uniform();
      const Tensor a = Run(bi, x), b = Run(bi, y);
      for (std::size_t t = 0; t < steps; ++t) {
        for (std::size_t c = 0; c < 3; ++c) {
          if (p > t) CHECK(a(t, c) == b(t, c));
          if (p < t) CHECK(a(t, 3 + c) == b(t, 3 + c));
        }
      }
    }
  }
  SUBCASE("shape errors") {
    Lstm lstm("l", 3, 4, rng);
    CHECK_THROWS_AS(Run(lstm, Tensor::Matrix(0, 3), Direction::kForward), ShapeError);
    CHECK_THROWS_AS(Run(lstm, Tensor::Matrix(2, 2), Direction::kForward), ShapeError);
  }
}
