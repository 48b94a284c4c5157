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

#include "dtrsum/autodiff.hpp"

#include <cmath>
#include <string>

namespace dtrsum::ad {

const Tensor& Var::value() const { return graph_->value(*this); }

void Graph::Train(std::span<Parameter* const> params) {
  for (Parameter* p : params) trainable_[p] = p;
}

Var Graph::Push(Node node) {
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

Var Graph::Constant(Tensor value) {
  if (!value.AllFinite()) {
    throw NumericalError("non-finite value in constant input");
  }
  Node node;
  node.value = std::move(value);
  node.op = "constant";
  return Push(std::move(node));
}

Var Graph::Param(const Parameter& param) {
  if (auto it = param_nodes_.find(&param); it != param_nodes_.end()) {
    return Var(this, it->second);
  }
  if (!param.value.AllFinite()) {
    throw NumericalError("non-finite value in parameter " + param.name);
  }
  Node node;
  node.value = param.value;
  node.op = "param";
  if (grad_enabled_) {
    if (auto it = trainable_.find(&param); it != trainable_.end()) {
      node.target = it->second;
      node.needs_grad = true;
    }
  }
  Var v = Push(std::move(node));
  param_nodes_[&param] = v.id();
  return v;
}

const Tensor& Graph::grad(Var v) const {
  const Node& node = nodes_[v.id()];
  if (node.grad.empty() && !node.value.empty()) {
    throw ValidationError("no gradient recorded for node " +
                          std::to_string(v.id()) + " (" + node.op + ")");
  }
  return node.grad;
}

Tensor& Graph::GradSlot(Var v) {
  Node& node = nodes_[v.id()];
  if (node.grad.empty() && !node.value.empty()) {
    node.grad = Tensor(node.value.shape(), 0.0);
  }
  return node.grad;
}

Var Graph::Record(Tensor value, const char* op,
                  std::initializer_list<Var> inputs, BackwardFn fn) {
  return Record(std::move(value), op,
                std::span<const Var>(inputs.begin(), inputs.size()),
                std::move(fn));
}

Var Graph::Record(Tensor value, const char* op, std::span<const Var> inputs,
                  BackwardFn fn) {
  if (!value.AllFinite()) {
    throw NumericalError(std::string("non-finite value produced by ") + op);
  }
  Node node;
  node.value = std::move(value);
  node.op = op;
  if (grad_enabled_) {
    for (const Var& in : inputs) {
      if (&in.graph() != this) {
        throw ValidationError(std::string("operand of ") + op +
                              " belongs to a different graph");
      }
      if (nodes_[in.id()].needs_grad) node.needs_grad = true;
    }
  }
  if (node.needs_grad) node.backward = std::move(fn);
  return Push(std::move(node));
}

double Graph::Backward(Var loss) {
  if (!grad_enabled_) {
    throw ValidationError("Backward() on a graph built without gradients");
  }
  const Tensor& loss_value = value(loss);
  if (loss_value.size() != 1) {
    throw ShapeError("loss must be scalar, got shape " +
                     ShapeString(loss_value.shape()));
  }
  for (Node& node : nodes_) node.grad = Tensor();
  GradSlot(loss).Fill(1.0);
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (!node.needs_grad || node.grad.empty()) continue;
    if (!node.grad.AllFinite()) {
      throw NumericalError(std::string("non-finite gradient flowing into ") +
                           node.op);
    }
    if (node.backward) node.backward(*this, node.grad);
    if (node.target != nullptr) {
      Tensor& dst = node.target->grad;
      if (!dst.SameShape(node.grad)) dst = Tensor(node.grad.shape(), 0.0);
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += node.grad[k];
    }
  }
  return loss_value.item();
}

namespace {

void RequireMatrix(const Tensor& t, const char* op) {
  if (t.rank() != 2) {
    throw ShapeError(std::string(op) + ": expected rank-2 tensor, got " +
                     ShapeString(t.shape()));
  }
}

void RequireSameShape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.SameShape(b)) {
    throw ShapeError(std::string(op) + ": shape mismatch " +
                     ShapeString(a.shape()) + " vs " + ShapeString(b.shape()));
  }
}

void Accumulate(Graph& g, Var v, const Tensor& delta) {
  if (!g.needs_grad(v)) return;
  Tensor& slot = g.GradSlot(v);
  for (std::size_t i = 0; i < slot.size(); ++i) slot[i] += delta[i];
}

// Elementwise op; `derivative` is evaluated at the input value.
template <typename F, typename D>
Var Unary(Var a, const char* op, F f, D derivative) {
  const Tensor& x = a.value();
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = f(x[i]);
  return a.graph().Record(std::move(out), op, {a},
                          [a, derivative](Graph& g, const Tensor& gout) {
                            if (!g.needs_grad(a)) return;
                            const Tensor& x = g.value(a);
                            Tensor& slot = g.GradSlot(a);
                            for (std::size_t i = 0; i < slot.size(); ++i) {
                              slot[i] += gout[i] * derivative(x[i]);
                            }
                          });
}

double StableSigmoid(double x) {
  if (x >= 0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Var MatMul(Var a, Var b) {
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  RequireMatrix(x, "matmul");
  RequireMatrix(y, "matmul");
  const std::size_t n = x.rows(), k = x.cols(), m = y.cols();
  if (y.rows() != k) {
    throw ShapeError("matmul: inner dimensions differ " +
                     ShapeString(x.shape()) + " x " + ShapeString(y.shape()));
  }
  Tensor out = Tensor::Matrix(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    double* orow = out.data() + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const double xv = x(i, p);
      if (xv == 0.0) continue;
      const double* yrow = y.data() + p * m;
      for (std::size_t j = 0; j < m; ++j) orow[j] += xv * yrow[j];
    }
  }
  return a.graph().Record(
      std::move(out), "matmul", {a, b},
      [a, b, n, k, m](Graph& g, const Tensor& gout) {
        const Tensor& x = g.value(a);
        const Tensor& y = g.value(b);
        if (g.needs_grad(a)) {
          Tensor& da = g.GradSlot(a);
          for (std::size_t i = 0; i < n; ++i) {
            const double* grow = gout.data() + i * m;
            for (std::size_t p = 0; p < k; ++p) {
              const double* yrow = y.data() + p * m;
              double acc = 0.0;
              for (std::size_t j = 0; j < m; ++j) acc += grow[j] * yrow[j];
              da(i, p) += acc;
            }
          }
        }
        if (g.needs_grad(b)) {
          Tensor& db = g.GradSlot(b);
          for (std::size_t i = 0; i < n; ++i) {
            const double* grow = gout.data() + i * m;
            for (std::size_t p = 0; p < k; ++p) {
              const double xv = x(i, p);
              if (xv == 0.0) continue;
              double* drow = db.data() + p * m;
              for (std::size_t j = 0; j < m; ++j) drow[j] += xv * grow[j];
            }
          }
        }
      });
}

Var Add(Var a, Var b) {
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  RequireSameShape(x, y, "add");
  Tensor out = x;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += y[i];
  return a.graph().Record(std::move(out), "add", {a, b},
                          [a, b](Graph& g, const Tensor& gout) {
                            Accumulate(g, a, gout);
                            Accumulate(g, b, gout);
                          });
}

Var Sub(Var a, Var b) {
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  RequireSameShape(x, y, "sub");
  Tensor out = x;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= y[i];
  return a.graph().Record(std::move(out), "sub", {a, b},
                          [a, b](Graph& g, const Tensor& gout) {
                            Accumulate(g, a, gout);
                            if (g.needs_grad(b)) {
                              Tensor& slot = g.GradSlot(b);
                              for (std::size_t i = 0; i < slot.size(); ++i) {
                                slot[i] -= gout[i];
                              }
                            }
                          });
}

Var Mul(Var a, Var b) {
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  RequireSameShape(x, y, "mul");
  Tensor out = x;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= y[i];
  return a.graph().Record(
      std::move(out), "mul", {a, b}, [a, b](Graph& g, const Tensor& gout) {
        const Tensor& x = g.value(a);
        const Tensor& y = g.value(b);
        if (g.needs_grad(a)) {
          Tensor& slot = g.GradSlot(a);
          for (std::size_t i = 0; i < slot.size(); ++i) slot[i] += gout[i] * y[i];
        }
        if (g.needs_grad(b)) {
          Tensor& slot = g.GradSlot(b);
          for (std::size_t i = 0; i < slot.size(); ++i) slot[i] += gout[i] * x[i];
        }
      });
}

Var Scale(Var a, double factor) {
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= factor;
  return a.graph().Record(std::move(out), "scale", {a},
                          [a, factor](Graph& g, const Tensor& gout) {
                            if (!g.needs_grad(a)) return;
                            Tensor& slot = g.GradSlot(a);
                            for (std::size_t i = 0; i < slot.size(); ++i) {
                              slot[i] += gout[i] * factor;
                            }
                          });
}

Var AddBias(Var x, Var b) {
  const Tensor& xv = x.value();
  const Tensor& bv = b.value();
  RequireMatrix(xv, "add_bias");
  RequireMatrix(bv, "add_bias");
  if (bv.rows() != 1 || bv.cols() != xv.cols()) {
    throw ShapeError("add_bias: bias " + ShapeString(bv.shape()) +
                     " does not broadcast over " + ShapeString(xv.shape()));
  }
  const std::size_t n = xv.rows(), c = xv.cols();
  Tensor out = xv;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < c; ++j) out(i, j) += bv[j];
  }
  return x.graph().Record(std::move(out), "add_bias", {x, b},
                          [x, b, n, c](Graph& g, const Tensor& gout) {
                            Accumulate(g, x, gout);
                            if (!g.needs_grad(b)) return;
                            Tensor& slot = g.GradSlot(b);
                            for (std::size_t i = 0; i < n; ++i) {
                              for (std::size_t j = 0; j < c; ++j) {
                                slot[j] += gout(i, j);
                              }
                            }
                          });
}

Var Sigmoid(Var a) {
  return Unary(a, "sigmoid", StableSigmoid, [](double x) {
    const double s = StableSigmoid(x);
    return s * (1.0 - s);
  });
}

Var Tanh(Var a) {
  return Unary(
      a, "tanh", [](double x) { return std::tanh(x); },
      [](double x) {
        const double t = std::tanh(x);
        return 1.0 - t * t;
      });
}

Var Relu(Var a) {
  return Unary(
      a, "relu", [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x) { return x > 0.0 ? 1.0 : 0.0; });
}

Var Sum(Var a) {
  double acc = 0.0;
  for (double v : a.value().values()) acc += v;
  return a.graph().Record(Tensor::Scalar(acc), "sum", {a},
                          [a](Graph& g, const Tensor& gout) {
                            if (!g.needs_grad(a)) return;
                            Tensor& slot = g.GradSlot(a);
                            const double d = gout[0];
                            for (std::size_t i = 0; i < slot.size(); ++i) {
                              slot[i] += d;
                            }
                          });
}

Var Mean(Var a) {
  const std::size_t n = a.value().size();
  if (n == 0) throw ShapeError("mean of empty tensor");
  double acc = 0.0;
  for (double v : a.value().values()) acc += v;
  return a.graph().Record(Tensor::Scalar(acc / static_cast<double>(n)), "mean",
                          {a}, [a, n](Graph& g, const Tensor& gout) {
                            if (!g.needs_grad(a)) return;
                            Tensor& slot = g.GradSlot(a);
                            const double d = gout[0] / static_cast<double>(n);
                            for (std::size_t i = 0; i < slot.size(); ++i) {
                              slot[i] += d;
                            }
                          });
}

Var SumSquares(Var a) {
  double acc = 0.0;
  for (double v : a.value().values()) acc += v * v;
  return a.graph().Record(Tensor::Scalar(acc), "sum_squares", {a},
                          [a](Graph& g, const Tensor& gout) {
                            if (!g.needs_grad(a)) return;
                            const Tensor& x = g.value(a);
                            Tensor& slot = g.GradSlot(a);
                            const double d = 2.0 * gout[0];
                            for (std::size_t i = 0; i < slot.size(); ++i) {
                              slot[i] += d * x[i];
                            }
                          });
}

Var ConcatCols(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no operands");
  const std::size_t n = parts[0].value().rows();
  std::size_t total = 0;
  std::vector<std::size_t> offsets;
  for (const Var& p : parts) {
    RequireMatrix(p.value(), "concat_cols");
    if (p.value().rows() != n) {
      throw ShapeError("concat_cols: row counts differ (" + std::to_string(n) +
                       " vs " + std::to_string(p.value().rows()) + ")");
    }
    offsets.push_back(total);
    total += p.value().cols();
  }
  Tensor out = Tensor::Matrix(n, total);
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Tensor& src = parts[k].value();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < src.cols(); ++j) {
        out(i, offsets[k] + j) = src(i, j);
      }
    }
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return parts[0].graph().Record(
      std::move(out), "concat_cols", parts,
      [inputs, offsets, n](Graph& g, const Tensor& gout) {
        for (std::size_t k = 0; k < inputs.size(); ++k) {
          if (!g.needs_grad(inputs[k])) continue;
          Tensor& slot = g.GradSlot(inputs[k]);
          const std::size_t c = slot.cols();
          for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < c; ++j) {
              slot(i, j) += gout(i, offsets[k] + j);
            }
          }
        }
      });
}

Var ConcatRows(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no operands");
  const std::size_t c = parts[0].value().cols();
  std::size_t total = 0;
  for (const Var& p : parts) {
    RequireMatrix(p.value(), "concat_rows");
    if (p.value().cols() != c) {
      throw ShapeError("concat_rows: column counts differ (" +
                       std::to_string(c) + " vs " +
                       std::to_string(p.value().cols()) + ")");
    }
    total += p.value().rows();
  }
  std::vector<double> data;
  data.reserve(total * c);
  for (const Var& p : parts) {
    const auto v = p.value().values();
    data.insert(data.end(), v.begin(), v.end());
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return parts[0].graph().Record(
      Tensor({total, c}, std::move(data)), "concat_rows", parts,
      [inputs](Graph& g, const Tensor& gout) {
        std::size_t offset = 0;
        for (const Var& in : inputs) {
          const std::size_t len = g.value(in).size();
          if (g.needs_grad(in)) {
            Tensor& slot = g.GradSlot(in);
            for (std::size_t i = 0; i < len; ++i) slot[i] += gout[offset + i];
          }
          offset += len;
        }
      });
}

Var SliceRows(Var a, std::size_t begin, std::size_t end) {
  const Tensor& x = a.value();
  RequireMatrix(x, "slice_rows");
  Tensor out = x.RowRange(begin, end);
  const std::size_t c = x.cols();
  return a.graph().Record(std::move(out), "slice_rows", {a},
                          [a, begin, c](Graph& g, const Tensor& gout) {
                            if (!g.needs_grad(a)) return;
                            Tensor& slot = g.GradSlot(a);
                            double* dst = slot.data() + begin * c;
                            for (std::size_t i = 0; i < gout.size(); ++i) {
                              dst[i] += gout[i];
                            }
                          });
}

Var SliceCols(Var a, std::size_t begin, std::size_t end) {
  const Tensor& x = a.value();
  RequireMatrix(x, "slice_cols");
  if (begin > end || end > x.cols()) {
    throw ShapeError("slice_cols: [" + std::to_string(begin) + ", " +
                     std::to_string(end) + ") out of bounds for " +
                     ShapeString(x.shape()));
  }
  const std::size_t n = x.rows(), w = end - begin;
  Tensor out = Tensor::Matrix(n, w);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < w; ++j) out(i, j) = x(i, begin + j);
  }
  return a.graph().Record(std::move(out), "slice_cols", {a},
                          [a, begin, n, w](Graph& g, const Tensor& gout) {
                            if (!g.needs_grad(a)) return;
                            Tensor& slot = g.GradSlot(a);
                            for (std::size_t i = 0; i < n; ++i) {
                              for (std::size_t j = 0; j < w; ++j) {
                                slot(i, begin + j) += gout(i, j);
                              }
                            }
                          });
}

Var ShiftRows(Var a, std::ptrdiff_t offset) {
  const Tensor& x = a.value();
  RequireMatrix(x, "shift_rows");
  const auto n = static_cast<std::ptrdiff_t>(x.rows());
  const std::size_t c = x.cols();
  Tensor out = Tensor::Matrix(x.rows(), c);
  for (std::ptrdiff_t t = 0; t < n; ++t) {
    const std::ptrdiff_t src = t + offset;
    if (src < 0 || src >= n) continue;
    for (std::size_t j = 0; j < c; ++j) {
      out(static_cast<std::size_t>(t), j) = x(static_cast<std::size_t>(src), j);
    }
  }
  return a.graph().Record(
      std::move(out), "shift_rows", {a},
      [a, offset, n, c](Graph& g, const Tensor& gout) {
        if (!g.needs_grad(a)) return;
        Tensor& slot = g.GradSlot(a);
        for (std::ptrdiff_t t = 0; t < n; ++t) {
          const std::ptrdiff_t src = t + offset;
          if (src < 0 || src >= n) continue;
          for (std::size_t j = 0; j < c; ++j) {
            slot(static_cast<std::size_t>(src), j) +=
                gout(static_cast<std::size_t>(t), j);
          }
        }
      });
}

Var RowScale(Var x, Var s) {
  const Tensor& xv = x.value();
  const Tensor& sv = s.value();
  RequireMatrix(xv, "row_scale");
  RequireMatrix(sv, "row_scale");
  if (sv.cols() != 1 || sv.rows() != xv.rows()) {
    throw ShapeError("row_scale: scale " + ShapeString(sv.shape()) +
                     " does not match rows of " + ShapeString(xv.shape()));
  }
  const std::size_t n = xv.rows(), c = xv.cols();
  Tensor out = xv;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < c; ++j) out(i, j) *= sv[i];
  }
  return x.graph().Record(
      std::move(out), "row_scale", {x, s},
      [x, s, n, c](Graph& g, const Tensor& gout) {
        const Tensor& xv = g.value(x);
        const Tensor& sv = g.value(s);
        if (g.needs_grad(x)) {
          Tensor& slot = g.GradSlot(x);
          for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < c; ++j) slot(i, j) += gout(i, j) * sv[i];
          }
        }
        if (g.needs_grad(s)) {
          Tensor& slot = g.GradSlot(s);
          for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < c; ++j) acc += gout(i, j) * xv(i, j);
            slot[i] += acc;
          }
        }
      });
}

Var Dropout(Var x, double rate, Rng& rng, bool training) {
  if (rate < 0.0 || rate >= 1.0) {
    throw ValidationError("dropout rate must lie in [0, 1), got " +
                          std::to_string(rate));
  }
  if (!training || rate == 0.0) return x;
  Graph& graph = x.graph();
  graph.MarkStochastic();
  const Tensor& xv = x.value();
  const double keep_scale = 1.0 / (1.0 - rate);
  Tensor mask(xv.shape());
  for (std::size_t i = 0; i < mask.size(); ++i) {
    mask[i] = rng.Uniform() < rate ? 0.0 : keep_scale;
  }
  Tensor out = xv;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= mask[i];
  return graph.Record(std::move(out), "dropout", {x},
                      [x, mask = std::move(mask)](Graph& g, const Tensor& gout) {
                        if (!g.needs_grad(x)) return;
                        Tensor& slot = g.GradSlot(x);
                        for (std::size_t i = 0; i < slot.size(); ++i) {
                          slot[i] += gout[i] * mask[i];
                        }
                      });
}

Var BatchNormTrain(Var x, Var gamma, Var beta, double eps, Tensor* batch_mean,
                   Tensor* batch_var) {
  const Tensor& xv = x.value();
  RequireMatrix(xv, "batch_norm");
  const std::size_t n = xv.rows(), c = xv.cols();
  if (n == 0) throw ShapeError("batch_norm: zero rows");
  if (gamma.value().size() != c || beta.value().size() != c) {
    throw ShapeError("batch_norm: gamma/beta length does not match " +
                     std::to_string(c) + " channels");
  }
  const Tensor& gv = gamma.value();
  const Tensor& bv = beta.value();

  Tensor mean = Tensor::Matrix(1, c);
  Tensor var = Tensor::Matrix(1, c);
  Tensor xhat = xv;
  Tensor inv_std = Tensor::Matrix(1, c, 1.0);
  const bool normalise = n > 1;
  if (normalise) {
    for (std::size_t j = 0; j < c; ++j) {
      double m = 0.0;
      for (std::size_t i = 0; i < n; ++i) m += xv(i, j);
      m /= static_cast<double>(n);
      double v = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = xv(i, j) - m;
        v += d * d;
      }
      v /= static_cast<double>(n);
      mean[j] = m;
      var[j] = v;
      inv_std[j] = 1.0 / std::sqrt(v + eps);
      for (std::size_t i = 0; i < n; ++i) {
        xhat(i, j) = (xv(i, j) - m) * inv_std[j];
      }
    }
  } else {
    for (std::size_t j = 0; j < c; ++j) mean[j] = xv(0, j);
  }
  if (batch_mean) *batch_mean = mean;
  if (batch_var) *batch_var = var;

  Tensor out = Tensor::Matrix(n, c);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < c; ++j) out(i, j) = gv[j] * xhat(i, j) + bv[j];
  }
  return x.graph().Record(
      std::move(out), "batch_norm", {x, gamma, beta},
      [x, gamma, beta, n, c, normalise, xhat = std::move(xhat),
       inv_std = std::move(inv_std)](Graph& g, const Tensor& gout) {
        const Tensor& gv = g.value(gamma);
        if (g.needs_grad(gamma)) {
          Tensor& slot = g.GradSlot(gamma);
          for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < c; ++j) slot[j] += gout(i, j) * xhat(i, j);
          }
        }
        if (g.needs_grad(beta)) {
          Tensor& slot = g.GradSlot(beta);
          for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < c; ++j) slot[j] += gout(i, j);
          }
        }
        if (!g.needs_grad(x)) return;
        Tensor& slot = g.GradSlot(x);
        if (!normalise) {
          for (std::size_t j = 0; j < c; ++j) slot[j] += gout[j] * gv[j];
          return;
        }
        const double inv_n = 1.0 / static_cast<double>(n);
        for (std::size_t j = 0; j < c; ++j) {
          double sum_g = 0.0, sum_gx = 0.0;
          for (std::size_t i = 0; i < n; ++i) {
            sum_g += gout(i, j);
            sum_gx += gout(i, j) * xhat(i, j);
          }
          const double k = gv[j] * inv_std[j];
          for (std::size_t i = 0; i < n; ++i) {
            slot(i, j) +=
                k * (gout(i, j) - inv_n * sum_g - xhat(i, j) * inv_n * sum_gx);
          }
        }
      });
}

Var BatchNormInfer(Var x, Var gamma, Var beta, const Tensor& mean,
                   const Tensor& var, double eps) {
  const Tensor& xv = x.value();
  RequireMatrix(xv, "batch_norm_infer");
  const std::size_t n = xv.rows(), c = xv.cols();
  if (gamma.value().size() != c || beta.value().size() != c ||
      mean.size() != c || var.size() != c) {
    throw ShapeError("batch_norm_infer: statistics do not match " +
                     std::to_string(c) + " channels");
  }
  Tensor inv_std = Tensor::Matrix(1, c);
  for (std::size_t j = 0; j < c; ++j) inv_std[j] = 1.0 / std::sqrt(var[j] + eps);
  Tensor xhat = Tensor::Matrix(n, c);
  Tensor out = Tensor::Matrix(n, c);
  const Tensor& gv = gamma.value();
  const Tensor& bv = beta.value();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      xhat(i, j) = (xv(i, j) - mean[j]) * inv_std[j];
      out(i, j) = gv[j] * xhat(i, j) + bv[j];
    }
  }
  return x.graph().Record(
      std::move(out), "batch_norm_infer", {x, gamma, beta},
      [x, gamma, beta, n, c, xhat = std::move(xhat),
       inv_std = std::move(inv_std)](Graph& g, const Tensor& gout) {
        const Tensor& gv = g.value(gamma);
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = 0; j < c; ++j) {
            const double d = gout(i, j);
            if (g.needs_grad(gamma)) g.GradSlot(gamma)[j] += d * xhat(i, j);
            if (g.needs_grad(beta)) g.GradSlot(beta)[j] += d;
            if (g.needs_grad(x)) g.GradSlot(x)(i, j) += d * gv[j] * inv_std[j];
          }
        }
      });
}

}  // namespace dtrsum::ad
