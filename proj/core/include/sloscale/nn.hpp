// Copyright 2026 The sloscale Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Small dense-network toolkit with explicit backpropagation. Parameters of a
// model live in one flat vector; tensors are row-major views into it.

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace sloscale::nn {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixView = Eigen::Map<RowMatrix>;
using ConstMatrixView = Eigen::Map<const RowMatrix>;

struct TensorSpec {
  std::string name;
  int rows = 0;
  int cols = 0;
  std::size_t offset = 0;
  std::size_t size() const { return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols); }
};

class ParamLayout {
 public:
  std::size_t add(std::string name, int rows, int cols);

  std::size_t size() const { return size_; }
  const std::vector<TensorSpec>& tensors() const { return tensors_; }
  const TensorSpec& operator[](std::size_t i) const { return tensors_[i]; }

  MatrixView view(Eigen::VectorXd& flat, std::size_t i) const;
  ConstMatrixView view(const Eigen::VectorXd& flat, std::size_t i) const;

  friend bool operator==(const ParamLayout& a, const ParamLayout& b);

 private:
  std::vector<TensorSpec> tensors_;
  std::size_t size_ = 0;
};

// Versioned text checkpoint: a header line, then per tensor
// "tensor <name> <rows> <cols>" followed by the row-major values.
void write_tensors(std::ostream& out, const ParamLayout& layout, const Eigen::VectorXd& flat);
// Throws Error(kShapeMismatch) when names or shapes differ from layout.
Eigen::VectorXd read_tensors(std::istream& in, const ParamLayout& layout);

enum class Activation { kIdentity, kRelu, kTanh };

// Fully connected network, ReLU on hidden layers, y = x W + b per layer.
// Inputs and outputs are batches with one sample per row.
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::vector<int> sizes, Activation output);

  const std::vector<int>& sizes() const { return sizes_; }
  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }
  Activation output_activation() const { return output_; }
  const ParamLayout& layout() const { return layout_; }

  // Uniform in +-1/sqrt(fan_in) for weights and biases.
  Eigen::VectorXd init_params(std::mt19937_64& rng) const;

  struct Cache {
    std::vector<RowMatrix> inputs;  // input of each layer
    std::vector<RowMatrix> pre;     // pre-activation of each layer
    RowMatrix output;
  };

  RowMatrix forward(const Eigen::VectorXd& params, const RowMatrix& x, Cache* cache = nullptr) const;

  // Adds dL/dparams into grad (when non-null) and returns dL/dx.
  // grad_output_pre, when given, is an extra gradient on the output layer's
  // pre-activation.
  RowMatrix backward(const Eigen::VectorXd& params, const Cache& cache, const RowMatrix& grad_output,
                     Eigen::VectorXd* grad, const RowMatrix* grad_output_pre = nullptr) const;

 private:
  std::vector<int> sizes_;
  Activation output_ = Activation::kIdentity;
  ParamLayout layout_;
};

class Adam {
 public:
  Adam() = default;
  Adam(std::size_t size, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad);
  double learning_rate() const { return lr_; }
  long steps() const { return t_; }

 private:
  double lr_ = 1e-3;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double eps_ = 1e-8;
  Eigen::VectorXd m_;
  Eigen::VectorXd v_;
  long t_ = 0;
};

// Elementwise params - lr * grad.
Eigen::VectorXd sgd_step(const Eigen::VectorXd& params, const Eigen::VectorXd& grad, double lr);

}  // namespace sloscale::nn
