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

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dtrsum {

// Error hierarchy. The CLI maps each family onto a distinct exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad arguments, inconsistent shapes, malformed documents.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// A NaN or Inf appeared; the message names the producing operation.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

enum class FormatErrorKind {
  kBadMagic,
  kVersionMismatch,
  kUnsupportedDtype,
  kTruncated,
  kOverflow,
  kManifestMismatch,
  kHyperparameterMismatch,
  kMalformed,
};

class FormatError : public ValidationError {
 public:
  FormatError(FormatErrorKind kind, const std::string& what)
      : ValidationError(what), kind_(kind) {}
  FormatErrorKind kind() const { return kind_; }

 private:
  FormatErrorKind kind_;
};

using Shape = std::vector<std::size_t>;

std::string ShapeString(const Shape& shape);

// Dense row-major tensor of doubles. Most of the library works with rank-2
// tensors (rows = frames); scalars are 1x1.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  static Tensor Scalar(double value);
  // T x 1 column from a vector of per-frame values.
  static Tensor Column(std::span<const double> values);
  static Tensor Row(std::span<const double> values);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::size_t rows() const;
  std::size_t cols() const;

  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * shape_[1] + c];
  }
  double& operator()(std::size_t r, std::size_t c) {
    return data_[r * shape_[1] + c];
  }
  double operator[](std::size_t i) const { return data_[i]; }
  double& operator[](std::size_t i) { return data_[i]; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  // Value of a single-element tensor.
  double item() const;
  bool AllFinite() const;
  void Fill(double value);
  bool SameShape(const Tensor& other) const { return shape_ == other.shape_; }

  // Rows [begin, end) as a new tensor.
  Tensor RowRange(std::size_t begin, std::size_t end) const;
  std::vector<double> ToVector() const { return data_; }

  friend bool operator==(const Tensor& a, const Tensor& b) = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

// Learnable tensor with a gradient slot of identical shape.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;

  Parameter() = default;
  Parameter(std::string name, Tensor value);

  void ZeroGrad() { grad.Fill(0.0); }
};

using ParamRefs = std::vector<Parameter*>;

}  // namespace dtrsum
