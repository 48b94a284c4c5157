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
#include <initializer_list>
#include <span>
#include <unordered_map>
#include <vector>

#include "dtrsum/rng.hpp"
#include "dtrsum/tensor.hpp"

namespace dtrsum::ad {

class Graph;

// Handle to a node in a Graph. Cheap to copy; valid while the graph lives.
class Var {
 public:
  Var() = default;

  Graph& graph() const { return *graph_; }
  std::uint32_t id() const { return id_; }
  bool valid() const { return graph_ != nullptr; }
  const Tensor& value() const;

 private:
  friend class Graph;
  Var(Graph* graph, std::uint32_t id) : graph_(graph), id_(id) {}

  Graph* graph_ = nullptr;
  std::uint32_t id_ = 0;
};

// Tape for reverse-mode differentiation. Nodes are appended in evaluation
// order, so the tape is a topological order of the DAG by construction.
//
// Parameters enter through Param(). Only parameters registered with
// Train() receive gradients; every other parameter is recorded as a
// constant, which is how one player is frozen while the other updates.
class Graph {
 public:
  using BackwardFn = std::function<void(Graph&, const Tensor& out_grad)>;

  explicit Graph(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  void Train(std::span<Parameter* const> params);

  Var Constant(Tensor value);
  // Each parameter maps to a single node per graph, so a parameter set used
  // several times accumulates gradients from every use.
  Var Param(const Parameter& param);

  bool grad_enabled() const { return grad_enabled_; }
  void MarkStochastic() { stochastic_ = true; }
  bool stochastic() const { return stochastic_; }
  std::size_t size() const { return nodes_.size(); }

  const Tensor& value(Var v) const { return nodes_[v.id()].value; }
  // Gradient of the last Backward() loss with respect to v.
  const Tensor& grad(Var v) const;
  bool needs_grad(Var v) const { return nodes_[v.id()].needs_grad; }

  // Seeds d(loss)/d(loss) = 1, propagates, and adds the result into the
  // grad slot of every trained parameter. Returns the loss value.
  double Backward(Var loss);

  // Appends a node. `fn` is dropped when no input needs a gradient.
  Var Record(Tensor value, const char* op, std::initializer_list<Var> inputs,
             BackwardFn fn);
  Var Record(Tensor value, const char* op, std::span<const Var> inputs,
             BackwardFn fn);

  // Gradient accumulator for v; allocated on first use during Backward().
  Tensor& GradSlot(Var v);

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    BackwardFn backward;
    const char* op = "";
    Parameter* target = nullptr;
    bool needs_grad = false;
  };

  Var Push(Node node);

  bool grad_enabled_;
  bool stochastic_ = false;
  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, Parameter*> trainable_;
  std::unordered_map<const Parameter*, std::uint32_t> param_nodes_;
};

// ---------------------------------------------------------------------------
// Primitive operations. All operate on rank-2 tensors; scalars are 1x1.
// Shape mismatches throw ShapeError; non-finite results throw
// NumericalError naming the operation.

Var MatMul(Var a, Var b);
Var Add(Var a, Var b);
Var Sub(Var a, Var b);
Var Mul(Var a, Var b);
Var Scale(Var a, double factor);
// x: N x C plus b: 1 x C broadcast over rows.
Var AddBias(Var x, Var b);
Var Sigmoid(Var a);
Var Tanh(Var a);
Var Relu(Var a);
Var Sum(Var a);
Var Mean(Var a);
Var SumSquares(Var a);
Var ConcatCols(std::span<const Var> parts);
Var ConcatRows(std::span<const Var> parts);
Var SliceRows(Var a, std::size_t begin, std::size_t end);
Var SliceCols(Var a, std::size_t begin, std::size_t end);
// out[t] = a[t + offset], zero outside [0, rows).
Var ShiftRows(Var a, std::ptrdiff_t offset);
// out[t, :] = x[t, :] * s[t]; s is N x 1.
Var RowScale(Var x, Var s);
// Inverted dropout. Identity when !training or rate == 0. Marks the graph
// stochastic when it actually samples.
Var Dropout(Var x, double rate, Rng& rng, bool training);

// Per-column normalisation over the rows of x using the batch statistics,
// then gamma * xhat + beta (gamma, beta: 1 x C). With a single row the
// normalisation is skipped and only the affine map is applied.
// `batch_mean` / `batch_var` receive the statistics when non-null.
Var BatchNormTrain(Var x, Var gamma, Var beta, double eps,
                   Tensor* batch_mean = nullptr, Tensor* batch_var = nullptr);
// Same affine form with fixed statistics (1 x C).
Var BatchNormInfer(Var x, Var gamma, Var beta, const Tensor& mean,
                   const Tensor& var, double eps);

}  // namespace dtrsum::ad
