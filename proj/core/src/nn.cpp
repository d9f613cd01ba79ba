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

#include "sloscale/nn.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "sloscale/error.hpp"

namespace sloscale::nn {

std::size_t ParamLayout::add(std::string name, int rows, int cols) {
  tensors_.push_back({std::move(name), rows, cols, size_});
  size_ += tensors_.back().size();
  return tensors_.size() - 1;
}

MatrixView ParamLayout::view(Eigen::VectorXd& flat, std::size_t i) const {
  const auto& t = tensors_[i];
  return MatrixView(flat.data() + t.offset, t.rows, t.cols);
}

ConstMatrixView ParamLayout::view(const Eigen::VectorXd& flat, std::size_t i) const {
  const auto& t = tensors_[i];
  return ConstMatrixView(flat.data() + t.offset, t.rows, t.cols);
}

bool operator==(const ParamLayout& a, const ParamLayout& b) {
  if (a.tensors_.size() != b.tensors_.size()) return false;
  for (std::size_t i = 0; i < a.tensors_.size(); ++i) {
    const auto& x = a.tensors_[i];
    const auto& y = b.tensors_[i];
    if (x.name != y.name || x.rows != y.rows || x.cols != y.cols) return false;
  }
  return true;
}

void write_tensors(std::ostream& out, const ParamLayout& layout, const Eigen::VectorXd& flat) {
  if (static_cast<std::size_t>(flat.size()) != layout.size()) {
    throw Error(ErrorCode::kShapeMismatch, "write_tensors: parameter vector does not match layout");
  }
  for (const auto& t : layout.tensors()) {
    out << "tensor " << t.name << ' ' << t.rows << ' ' << t.cols << '\n';
    for (int r = 0; r < t.rows; ++r) {
      std::string line;
      for (int c = 0; c < t.cols; ++c) {
        if (c) line += ' ';
        line += fmt::format("{:.17g}", flat[static_cast<Eigen::Index>(t.offset + r * t.cols + c)]);
      }
      out << line << '\n';
    }
  }
}

Eigen::VectorXd read_tensors(std::istream& in, const ParamLayout& layout) {
  Eigen::VectorXd flat(static_cast<Eigen::Index>(layout.size()));
  for (const auto& t : layout.tensors()) {
    std::string word;
    std::string name;
    int rows = 0;
    int cols = 0;
    if (!(in >> word >> name >> rows >> cols) || word != "tensor") {
      throw Error(ErrorCode::kShapeMismatch, "checkpoint: expected tensor " + t.name);
    }
    if (name != t.name || rows != t.rows || cols != t.cols) {
      throw Error(ErrorCode::kShapeMismatch,
                  fmt::format("checkpoint: tensor {} {}x{} does not match expected {} {}x{}", name, rows, cols,
                              t.name, t.rows, t.cols));
    }
    for (std::size_t i = 0; i < t.size(); ++i) {
      std::string token;
      if (!(in >> token)) throw Error(ErrorCode::kShapeMismatch, "checkpoint: truncated tensor " + t.name);
      flat[static_cast<Eigen::Index>(t.offset + i)] = std::stod(token);
    }
  }
  return flat;
}

Mlp::Mlp(std::vector<int> sizes, Activation output) : sizes_(std::move(sizes)), output_(output) {
  if (sizes_.size() < 2) throw Error(ErrorCode::kInvalidArgument, "mlp needs at least two layer sizes");
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    layout_.add(fmt::format("W{}", l), sizes_[l], sizes_[l + 1]);
    layout_.add(fmt::format("b{}", l), 1, sizes_[l + 1]);
  }
}

Eigen::VectorXd Mlp::init_params(std::mt19937_64& rng) const {
  Eigen::VectorXd flat(static_cast<Eigen::Index>(layout_.size()));
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    double bound = 1.0 / std::sqrt(static_cast<double>(sizes_[l]));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (std::size_t t : {2 * l, 2 * l + 1}) {
      const auto& spec = layout_[t];
      for (std::size_t i = 0; i < spec.size(); ++i) flat[static_cast<Eigen::Index>(spec.offset + i)] = dist(rng);
    }
  }
  return flat;
}

namespace {

RowMatrix activate(const RowMatrix& z, Activation act) {
  switch (act) {
    case Activation::kRelu:
      return z.cwiseMax(0.0);
    case Activation::kTanh:
      return z.array().tanh().matrix();
    case Activation::kIdentity:
      break;
  }
  return z;
}

// dL/dz given dL/dy and the pre-activation z.
RowMatrix activation_backward(const RowMatrix& z, const RowMatrix& dy, Activation act) {
  switch (act) {
    case Activation::kRelu:
      return (z.array() > 0.0).select(dy.array(), 0.0).matrix();
    case Activation::kTanh: {
      RowMatrix t = z.array().tanh().matrix();
      return (dy.array() * (1.0 - t.array().square())).matrix();
    }
    case Activation::kIdentity:
      break;
  }
  return dy;
}

}  // namespace

RowMatrix Mlp::forward(const Eigen::VectorXd& params, const RowMatrix& x, Cache* cache) const {
  if (x.cols() != input_dim()) throw Error(ErrorCode::kShapeMismatch, "mlp: input width mismatch");
  const std::size_t n_layers = sizes_.size() - 1;
  if (cache) {
    cache->inputs.clear();
    cache->pre.clear();
  }
  RowMatrix h = x;
  for (std::size_t l = 0; l < n_layers; ++l) {
    auto w = layout_.view(params, 2 * l);
    auto b = layout_.view(params, 2 * l + 1);
    RowMatrix z = h * w;
    z.rowwise() += b.row(0);
    if (cache) {
      cache->inputs.push_back(h);
      cache->pre.push_back(z);
    }
    h = activate(z, l + 1 == n_layers ? output_ : Activation::kRelu);
  }
  if (cache) cache->output = h;
  return h;
}

RowMatrix Mlp::backward(const Eigen::VectorXd& params, const Cache& cache, const RowMatrix& grad_output,
                        Eigen::VectorXd* grad, const RowMatrix* grad_output_pre) const {
  const std::size_t n_layers = sizes_.size() - 1;
  RowMatrix dy = grad_output;
  for (std::size_t l = n_layers; l-- > 0;) {
    RowMatrix dz = activation_backward(cache.pre[l], dy, l + 1 == n_layers ? output_ : Activation::kRelu);
    if (grad_output_pre && l + 1 == n_layers) dz += *grad_output_pre;
    if (grad) {
      layout_.view(*grad, 2 * l) += cache.inputs[l].transpose() * dz;
      layout_.view(*grad, 2 * l + 1) += dz.colwise().sum();
    }
    dy = dz * layout_.view(params, 2 * l).transpose();
  }
  return dy;
}

Adam::Adam(std::size_t size, double lr, double beta1, double beta2, double eps)
    : lr_(lr),
      beta1_(beta1),
      beta2_(beta2),
      eps_(eps),
      m_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size))),
      v_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size))) {}

void Adam::step(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
  ++t_;
  m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
  v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseProduct(grad);
  double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  params.array() -= lr_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
}

Eigen::VectorXd sgd_step(const Eigen::VectorXd& params, const Eigen::VectorXd& grad, double lr) {
  if (params.size() != grad.size()) throw Error(ErrorCode::kShapeMismatch, "sgd_step: size mismatch");
  return params - lr * grad;
}

}  // namespace sloscale::nn
