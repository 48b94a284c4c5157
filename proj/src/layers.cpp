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

#include "dtrsum/layers.hpp"

#include <cmath>

namespace dtrsum {

using ad::Var;

int TimeSpan(int hole) {
  if (hole < 1) throw ValidationError("hole size must be >= 1");
  return 2 * hole + 1;
}

int ReceptiveField(int hole, int kernel, int layer) {
  if (hole < 1 || kernel < 1 || layer < 1) {
    throw ValidationError("receptive field needs hole, kernel, layer >= 1");
  }
  return hole * (kernel - 1) * layer + 1;
}

namespace {

Tensor UniformMatrix(std::size_t rows, std::size_t cols, double bound,
                     Rng& rng) {
  Tensor t = Tensor::Matrix(rows, cols);
  for (double& v : t.values()) v = rng.Uniform(-bound, bound);
  return t;
}

}  // namespace

Linear::Linear(const std::string& name, std::size_t in, std::size_t out,
               Rng& rng)
    : weight(name + ".weight",
             UniformMatrix(in, out, 1.0 / std::sqrt(static_cast<double>(in)), rng)),
      bias(name + ".bias", Tensor::Matrix(1, out)) {}

Var Linear::Forward(Var x) const {
  ad::Graph& g = x.graph();
  return ad::AddBias(ad::MatMul(x, g.Param(weight)), g.Param(bias));
}

DtrUnit::DtrUnit(const std::string& name, int hole, std::size_t in,
                 std::size_t out, Rng& rng)
    : hole_(hole), in_dim_(in), out_dim_(out) {
  if (hole < 1) throw ValidationError("hole size must be >= 1");
  const double bound =
      1.0 / std::sqrt(static_cast<double>(kTemporalKernel * in));
  weight = Parameter(name + ".weight",
                     UniformMatrix(kTemporalKernel * in, out, bound, rng));
  bias = Parameter(name + ".bias", Tensor::Matrix(1, out));
}

Var DtrUnit::Forward(Var features) const {
  const Tensor& f = features.value();
  if (f.rank() != 2 || f.cols() != in_dim_) {
    throw ShapeError("dtr unit expects T x " + std::to_string(in_dim_) +
                     " input, got " + ShapeString(f.shape()));
  }
  if (f.rows() == 0) throw ShapeError("dtr unit: empty sequence");
  ad::Graph& g = features.graph();
  const Var taps[] = {ad::ShiftRows(features, -hole_), features,
                      ad::ShiftRows(features, hole_)};
  return ad::AddBias(ad::MatMul(ad::ConcatCols(taps), g.Param(weight)),
                     g.Param(bias));
}

DtrLayer::DtrLayer(const std::string& name, const HoleSet& holes,
                   std::size_t dim, Rng& rng)
    : gamma(name + ".bn.gamma", Tensor::Matrix(1, dim, 1.0)),
      beta(name + ".bn.beta", Tensor::Matrix(1, dim, 0.0)),
      running_mean(name + ".bn.running_mean", Tensor::Matrix(1, dim, 0.0)),
      running_var(name + ".bn.running_var", Tensor::Matrix(1, dim, 1.0)) {
  for (std::size_t i = 0; i < units.size(); ++i) {
    units[i] = DtrUnit(name + ".unit" + std::to_string(i) + "_h" +
                           std::to_string(holes[i]),
                       holes[i], dim, dim, rng);
  }
}

Var DtrLayer::Forward(Var features, Mode mode, BatchStats* stats) const {
  if (features.value().rank() != 2 || features.value().rows() == 0) {
    throw ShapeError("dtr layer: empty sequence");
  }
  Var sum = units[0].Forward(features);
  for (std::size_t i = 1; i < units.size(); ++i) {
    sum = ad::Add(sum, units[i].Forward(features));
  }
  if (bypass_batch_norm) return ad::Relu(sum);

  ad::Graph& g = features.graph();
  Var normed;
  if (mode == Mode::kTrain) {
    BatchStats local;
    normed = ad::BatchNormTrain(sum, g.Param(gamma), g.Param(beta), kEpsilon,
                                &local.mean, &local.var);
    if (stats != nullptr) {
      // A single frame carries no variance; such batches leave the running
      // statistics untouched.
      *stats = sum.value().rows() > 1 ? std::move(local) : BatchStats{};
    }
  } else {
    normed = ad::BatchNormInfer(sum, g.Param(gamma), g.Param(beta),
                                running_mean.value, running_var.value,
                                kEpsilon);
  }
  return ad::Relu(normed);
}

void DtrLayer::UpdateRunningStats(const BatchStats& stats) {
  if (stats.mean.empty()) return;
  for (std::size_t j = 0; j < running_mean.value.size(); ++j) {
    running_mean.value[j] =
        kMomentum * running_mean.value[j] + (1.0 - kMomentum) * stats.mean[j];
    running_var.value[j] =
        kMomentum * running_var.value[j] + (1.0 - kMomentum) * stats.var[j];
  }
}

void DtrLayer::CollectParams(ParamRefs& out) {
  for (DtrUnit& unit : units) unit.CollectParams(out);
  out.push_back(&gamma);
  out.push_back(&beta);
}

void DtrLayer::CollectBuffers(ParamRefs& out) {
  out.push_back(&running_mean);
  out.push_back(&running_var);
}

DtrNetwork::DtrNetwork(const std::string& name, const HoleSet& holes,
                       std::size_t dim, Rng& rng) {
  for (int j = 0; j < kDtrLayers; ++j) {
    layers.emplace_back(name + ".layer" + std::to_string(j), holes, dim, rng);
  }
}

DtrNetwork::Output DtrNetwork::Forward(Var features, Mode mode,
                                       std::vector<BatchStats>* stats) const {
  Output out;
  if (stats) stats->assign(layers.size(), BatchStats{});
  Var x = features;
  for (std::size_t j = 0; j < layers.size(); ++j) {
    x = layers[j].Forward(x, mode, stats ? &(*stats)[j] : nullptr);
    out.per_layer.push_back(x);
  }
  out.features = x;
  return out;
}

void DtrNetwork::UpdateRunningStats(const std::vector<BatchStats>& stats) {
  for (std::size_t j = 0; j < layers.size() && j < stats.size(); ++j) {
    layers[j].UpdateRunningStats(stats[j]);
  }
}

void DtrNetwork::CollectParams(ParamRefs& out) {
  for (DtrLayer& layer : layers) layer.CollectParams(out);
}

void DtrNetwork::CollectBuffers(ParamRefs& out) {
  for (DtrLayer& layer : layers) layer.CollectBuffers(out);
}

HoleSet DtrNetwork::holes() const {
  HoleSet h{};
  if (layers.empty()) return h;
  for (std::size_t i = 0; i < h.size(); ++i) h[i] = layers[0].units[i].hole();
  return h;
}

Lstm::Lstm(const std::string& name, std::size_t in, std::size_t hidden,
           Rng& rng) {
  if (in == 0 || hidden == 0) throw ValidationError("lstm dims must be >= 1");
  const double k = 1.0 / std::sqrt(static_cast<double>(hidden));
  w_input = Parameter(name + ".w_input", UniformMatrix(in, 4 * hidden, k, rng));
  w_recurrent = Parameter(name + ".w_recurrent",
                          UniformMatrix(hidden, 4 * hidden, k, rng));
  Tensor b = Tensor::Matrix(1, 4 * hidden);
  for (std::size_t j = hidden; j < 2 * hidden; ++j) b[j] = 1.0;
  bias = Parameter(name + ".bias", std::move(b));
}

Var Lstm::Forward(Var x, Direction direction) const {
  const Tensor& xv = x.value();
  const std::size_t h_dim = hidden();
  if (xv.rank() != 2 || xv.cols() != in_dim()) {
    throw ShapeError("lstm expects T x " + std::to_string(in_dim()) +
                     " input, got " + ShapeString(xv.shape()));
  }
  const std::size_t steps = xv.rows();
  if (steps == 0) throw ShapeError("lstm: empty sequence");

  ad::Graph& g = x.graph();
  const Var u = g.Param(w_recurrent);
  const Var projected =
      ad::AddBias(ad::MatMul(x, g.Param(w_input)), g.Param(bias));

  std::vector<Var> hidden_states(steps);
  Var h, c;
  for (std::size_t k = 0; k < steps; ++k) {
    const std::size_t t = direction == Direction::kForward ? k : steps - 1 - k;
    Var gates = ad::SliceRows(projected, t, t + 1);
    if (h.valid()) gates = ad::Add(gates, ad::MatMul(h, u));
    const Var in_gate = ad::Sigmoid(ad::SliceCols(gates, 0, h_dim));
    const Var forget_gate = ad::Sigmoid(ad::SliceCols(gates, h_dim, 2 * h_dim));
    const Var out_gate = ad::Sigmoid(ad::SliceCols(gates, 2 * h_dim, 3 * h_dim));
    const Var candidate = ad::Tanh(ad::SliceCols(gates, 3 * h_dim, 4 * h_dim));
    const Var update = ad::Mul(in_gate, candidate);
    c = c.valid() ? ad::Add(ad::Mul(forget_gate, c), update) : update;
    h = ad::Mul(out_gate, ad::Tanh(c));
    hidden_states[t] = h;
  }
  return ad::ConcatRows(hidden_states);
}

void Lstm::CollectParams(ParamRefs& out) {
  out.push_back(&w_input);
  out.push_back(&w_recurrent);
  out.push_back(&bias);
}

BiLstm::BiLstm(const std::string& name, std::size_t in, std::size_t hidden,
               Rng& rng)
    : forward(name + ".fwd", in, hidden, rng),
      backward(name + ".bwd", in, hidden, rng) {}

Var BiLstm::Forward(Var x) const {
  const Var parts[] = {forward.Forward(x, Direction::kForward),
                       backward.Forward(x, Direction::kBackward)};
  return ad::ConcatCols(parts);
}

void BiLstm::CollectParams(ParamRefs& out) {
  forward.CollectParams(out);
  backward.CollectParams(out);
}

}  // namespace dtrsum
