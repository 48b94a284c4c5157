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

#include "dtrsum/autodiff.hpp"
#include "dtrsum/gradcheck.hpp"
#include "dtrsum/optim.hpp"
#include "dtrsum/rng.hpp"
#include "test_util.hpp"

using namespace dtrsum;
using dtrsum::testing::RandomMatrix;

TEST_CASE("tensor shape and data length agree") {
  CHECK_THROWS_AS(Tensor({2, 3}, std::vector<double>(5)), ShapeError);
  const Tensor t = Tensor::Matrix(2, 3, 1.5);
  CHECK(t.size() == 6);
  CHECK(t.rows() == 2);
  CHECK(t.cols() == 3);
  CHECK(ShapeString(t.shape()) == "[2x3]");
  CHECK_THROWS_AS(t.item(), ShapeError);
  CHECK(Tensor::Scalar(4.0).item() == 4.0);
  const Tensor r = Tensor({3, 2}, {1, 2, 3, 4, 5, 6}).RowRange(1, 3);
  CHECK(r == Tensor({2, 2}, {3, 4, 5, 6}));
}

TEST_CASE("rng streams are reproducible and independent") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.NextU64() == b.NextU64());
  Rng base(42);
  Rng d = base.Fork(RngStream::kDropout);
  Rng s = base.Fork(RngStream::kRandomSummary);
  int same = 0;
  for (int i = 0; i < 100; ++i) same += d.NextU64() == s.NextU64();
  CHECK(same == 0);
  Rng u(5);
  for (int i = 0; i < 1000; ++i) {
    const double x = u.Uniform();
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
    CHECK(u.Below(7) < 7);
  }
}

TEST_CASE("d/dx sum(x*x) at 3 is 6") {
  Parameter x("x", Tensor::Scalar(3.0));
  ad::Graph g;
  ParamRefs params{&x};
  g.Train(params);
  const ad::Var v = g.Param(x);
  g.Backward(ad::Sum(ad::Mul(v, v)));
  CHECK(x.grad.item() == 6.0);
}

TEST_CASE("sigmoid derivative at zero is one quarter") {
  Parameter x("x", Tensor::Scalar(0.0));
  ad::Graph g;
  ParamRefs params{&x};
  g.Train(params);
  const ad::Var s = ad::Sigmoid(g.Param(x));
  CHECK(s.value().item() == 0.5);
  g.Backward(s);
  CHECK(x.grad.item() == 0.25);
}

TEST_CASE("sigmoid is symmetric to machine precision") {
  ad::Graph g(false);
  Tensor xs = Tensor::Matrix(1, 601);
  for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = -30.0 + 0.1 * static_cast<double>(i);
  Tensor neg = xs;
  for (double& v : neg.values()) v = -v;
  const Tensor a = ad::Sigmoid(g.Constant(xs)).value();
  const Tensor b = ad::Sigmoid(g.Constant(neg)).value();
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(std::abs(a[i] + b[i] - 1.0) <= std::numeric_limits<double>::epsilon());
  }
}

TEST_CASE("relu and dropout basics") {
  ad::Graph g(false);
  const Tensor r = ad::Relu(g.Constant(Tensor({1, 2}, {-1.0, 2.0}))).value();
  CHECK(r == Tensor({1, 2}, {0.0, 2.0}));
  Rng rng(1);
  const Tensor x = RandomMatrix(rng, 4, 3);
  const ad::Var vx = g.Constant(x);
  CHECK(ad::Dropout(vx, 0.0, rng, true).value() == x);
  CHECK(ad::Dropout(vx, 0.0, rng, false).value() == x);
  CHECK(ad::Dropout(vx, 0.5, rng, false).value() == x);
  CHECK_FALSE(g.stochastic());
  ad::Dropout(vx, 0.5, rng, true);
  CHECK(g.stochastic());
  CHECK_THROWS_AS(ad::Dropout(vx, 1.0, rng, true), ValidationError);
}

TEST_CASE("shape mismatches and non-scalar losses are rejected") {
  ad::Graph g;
  const ad::Var a = g.Constant(Tensor::Matrix(2, 3, 1.0));
  const ad::Var b = g.Constant(Tensor::Matrix(2, 2, 1.0));
  CHECK_THROWS_AS(ad::Add(a, b), ShapeError);
  CHECK_THROWS_AS(ad::MatMul(a, a), ShapeError);
  CHECK_THROWS_AS(g.Backward(a), ValidationError);
}

TEST_CASE("non-finite results abort naming the operation") {
  ad::Graph g;
  const ad::Var big = g.Constant(Tensor::Scalar(1e200));
  try {
    ad::Mul(big, big);
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("mul") != std::string::npos);
  }
}

TEST_CASE("two-layer relu chain matches finite differences") {
  Rng rng(11);
  Parameter v("v", RandomMatrix(rng, 3, 4));
  Parameter w("w", RandomMatrix(rng, 4, 1));
  const Tensor x = RandomMatrix(rng, 5, 3);
  const auto build = [&](ad::Graph& g) {
    return ad::Sum(ad::MatMul(ad::Relu(ad::MatMul(g.Constant(x), g.Param(v))), g.Param(w)));
  };
  const GradCheckReport report = GradCheck(build, {&v, &w}, {.step = 1e-5, .tolerance = 1e-6});
  CHECK(report.passed);
  CHECK(report.max_rel_error < 1e-6);
}

TEST_CASE("every primitive passes the gradient check") {
  Rng rng(5);
  Parameter a("a", RandomMatrix(rng, 4, 3));
  Parameter b("b", RandomMatrix(rng, 4, 3));
  Parameter m("m", RandomMatrix(rng, 3, 2));
  Parameter bias("bias", RandomMatrix(rng, 1, 3));
  Parameter s("s", RandomMatrix(rng, 4, 1));
  Parameter gamma("gamma", RandomMatrix(rng, 1, 3));
  Parameter beta("beta", RandomMatrix(rng, 1, 3));
  const ParamRefs all{&a, &b, &m, &bias, &s, &gamma, &beta};
  Tensor mean = Tensor::Matrix(1, 3, 0.1), var = Tensor::Matrix(1, 3, 2.0);

  using Builder = std::function<ad::Var(ad::Graph&)>;
  const std::vector<std::pair<const char*, Builder>> cases = {
      {"matmul", [&](ad::Graph& g) { return ad::Sum(ad::MatMul(g.Param(a), g.Param(m))); }},
      {"add_sub", [&](ad::Graph& g) {
         return ad::SumSquares(ad::Sub(ad::Add(g.Param(a), g.Param(b)), g.Param(b)));
       }},
      {"mul", [&](ad::Graph& g) { return ad::Sum(ad::Mul(g.Param(a), g.Param(b))); }},
      {"scale", [&](ad::Graph& g) { return ad::Sum(ad::Scale(g.Param(a), -2.5)); }},
      {"bias", [&](ad::Graph& g) {
         return ad::SumSquares(ad::AddBias(g.Param(a), g.Param(bias)));
       }},
      {"sigmoid", [&](ad::Graph& g) { return ad::Sum(ad::Sigmoid(g.Param(a))); }},
      {"tanh", [&](ad::Graph& g) { return ad::Sum(ad::Tanh(g.Param(a))); }},
      {"mean", [&](ad::Graph& g) { return ad::Mean(ad::Mul(g.Param(a), g.Param(a))); }},
      {"concat", [&](ad::Graph& g) {
         const ad::Var cols[] = {g.Param(a), g.Param(b)};
         const ad::Var rows[] = {g.Param(a), g.Param(b)};
         return ad::Add(ad::SumSquares(ad::ConcatCols(cols)),
                        ad::Sum(ad::Tanh(ad::ConcatRows(rows))));
       }},
      {"slices", [&](ad::Graph& g) {
         return ad::Add(ad::SumSquares(ad::SliceRows(g.Param(a), 1, 3)),
                        ad::Sum(ad::Tanh(ad::SliceCols(g.Param(b), 0, 2))));
       }},
      {"shift", [&](ad::Graph& g) {
         return ad::Add(ad::Sum(ad::Mul(ad::ShiftRows(g.Param(a), 2), g.Param(b))),
                        ad::Sum(ad::Mul(ad::ShiftRows(g.Param(a), -1), g.Param(b))));
       }},
      {"rowscale", [&](ad::Graph& g) {
         return ad::SumSquares(ad::RowScale(g.Param(a), g.Param(s)));
       }},
      {"batchnorm_train", [&](ad::Graph& g) {
         return ad::Sum(ad::Mul(
             ad::BatchNormTrain(g.Param(a), g.Param(gamma), g.Param(beta), 1e-9), g.Param(b)));
       }},
      {"batchnorm_infer", [&](ad::Graph& g) {
         return ad::Sum(ad::Mul(
             ad::BatchNormInfer(g.Param(a), g.Param(gamma), g.Param(beta), mean, var, 1e-9),
             g.Param(b)));
       }},
  };
  for (const auto& [name, build] : cases) {
    CAPTURE(name);
    const GradCheckReport report = GradCheck(build, all, {.step = 1e-5, .tolerance = 1e-6});
    CHECK(report.passed);
  }
  // Relu is checked away from its kink.
  Parameter away("away", Tensor({2, 2}, {-1.0, 0.5, 2.0, -0.3}));
  CHECK(GradCheck([&](ad::Graph& g) { return ad::SumSquares(ad::Relu(g.Param(away))); },
                  {&away}, {.step = 1e-5, .tolerance = 1e-6})
            .passed);
}

TEST_CASE("gradient check basics") {
  Parameter x("x", Tensor::Scalar(3.0));
  const auto square = [&](ad::Graph& g) {
    const ad::Var v = g.Param(x);
    return ad::Mul(v, v);
  };
  const GradCheckReport r = GradCheck(square, {&x});
  CHECK(r.passed);
  CHECK(r.max_rel_error < 1e-9);
  CHECK(x.grad.item() == 0.0);  // left zeroed

  const GradCheckReport c =
      GradCheck([&](ad::Graph& g) { return g.Constant(Tensor::Scalar(2.0)); }, {&x});
  CHECK(c.max_rel_error == 0.0);

  CHECK_THROWS_AS(GradCheck(square, {&x}, {.step = 1e-2}), ValidationError);
  CHECK_THROWS_AS(GradCheck(square, {&x}, {.step = 1e-9}), ValidationError);

  Rng rng(3);
  CHECK_THROWS_AS(GradCheck([&](ad::Graph& g) {
                    return ad::Sum(ad::Dropout(g.Param(x), 0.5, rng, true));
                  }, {&x}),
                  ValidationError);
  CHECK(RelativeError(2.0, 1.0) == 0.5);
  CHECK(RelativeError(0.5, 0.25) == 0.25);
}

TEST_CASE("a corrupted backward rule is caught and named") {
  Parameter w("layer.weight", Tensor({1, 2}, {0.3, -0.7}));
  const auto build = [&](ad::Graph& g) {
    const ad::Var p = g.Param(w);
    Tensor out = p.value();
    for (double& v : out.values()) v = v * v;
    // Claims d(x^2)/dx = x instead of 2x.
    const ad::Var sq = g.Record(std::move(out), "bad_square", {p},
                                [p](ad::Graph& gr, const Tensor& gout) {
                                  Tensor& slot = gr.GradSlot(p);
                                  for (std::size_t i = 0; i < slot.size(); ++i) {
                                    slot[i] += gout[i] * p.value()[i];
                                  }
                                });
    return ad::Sum(sq);
  };
  const GradCheckReport report = GradCheck(build, {&w});
  CHECK_FALSE(report.passed);
  REQUIRE(report.params.size() == 1);
  CHECK(report.params[0].name == "layer.weight");
  CHECK_FALSE(report.params[0].passed);
}

TEST_CASE("adam update rules") {
  SUBCASE("zero gradient leaves parameters unchanged") {
    Parameter p("p", Tensor({1, 3}, {1.0, -2.0, 0.5}));
    const Tensor before = p.value;
    Adam adam({&p}, {.learning_rate = 0.1});
    adam.Step();
    CHECK(p.value == before);
    CHECK(adam.step_count() == 1);
  }
  SUBCASE("first step moves each entry by lr against the gradient sign") {
    Parameter p("p", Tensor({1, 2}, {0.0, 0.0}));
    p.grad = Tensor({1, 2}, {3.0, -0.2});
    Adam adam({&p}, {.learning_rate = 0.01});
    adam.Step();
    CHECK(p.value[0] == doctest::Approx(-0.01).epsilon(1e-6));
    CHECK(p.value[1] == doctest::Approx(0.01).epsilon(1e-6));
    CHECK(p.grad[0] == 0.0);
    CHECK(p.grad[1] == 0.0);
  }
  SUBCASE("matches a hand-rolled scalar Adam on (w-1)^2") {
    Parameter p("w", Tensor::Scalar(0.0));
    Adam adam({&p}, {.learning_rate = 0.1});
    double w = 0.0, m = 0.0, v = 0.0;
    double prev = p.value.item();
    for (int k = 1; k <= 10; ++k) {
      const double grad = 2.0 * (p.value.item() - 1.0);
      p.grad = Tensor::Scalar(grad);
      adam.Step();
      const double gw = 2.0 * (w - 1.0);
      m = 0.9 * m + 0.1 * gw;
      v = 0.999 * v + 0.001 * gw * gw;
      const double mhat = m / (1.0 - std::pow(0.9, k));
      const double vhat = v / (1.0 - std::pow(0.999, k));
      w -= 0.1 * mhat / (std::sqrt(vhat) + 1e-8);
      CHECK(p.value.item() == doctest::Approx(w).epsilon(1e-12));
      CHECK(p.value.item() > prev);
      CHECK(p.value.item() < 1.0 + 1e-9);
      prev = p.value.item();
    }
  }
  SUBCASE("a gradient slot of the wrong shape is rejected") {
    Parameter p("p", Tensor::Matrix(2, 2));
    p.grad = Tensor();
    Adam adam({&p}, {});
    CHECK_THROWS_AS(adam.Step(), ValidationError);
  }
}

TEST_CASE("gradient norm clipping") {
  Parameter a("a", Tensor::Matrix(1, 2)), b("b", Tensor::Matrix(1, 1));
  a.grad = Tensor({1, 2}, {3.0, 0.0});
  b.grad = Tensor({1, 1}, {4.0});
  ParamRefs ps{&a, &b};
  CHECK(GradNormSquared(ps) == 25.0);
  CHECK(ClipGradNorm(ps, 1.0) == doctest::Approx(5.0));
  CHECK(std::sqrt(GradNormSquared(ps)) == doctest::Approx(1.0));
}

TEST_CASE("repeated forward passes are bitwise identical") {
  Rng rng(9);
  const Tensor x = RandomMatrix(rng, 6, 4);
  Parameter w("w", RandomMatrix(rng, 4, 4));
  auto run = [&] {
    ad::Graph g(false);
    return ad::Tanh(ad::MatMul(g.Constant(x), g.Param(w))).value();
  };
  CHECK(run() == run());
}
