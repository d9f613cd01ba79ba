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

#include <algorithm>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sloscale/nn.hpp"

namespace sloscale::testing {

struct TensorCheck {
  std::string name;
  double rel_error = 0.0;  // ||analytic - numeric|| / max(||analytic||, ||numeric||, floor)
  double norm = 0.0;
};

// Central differences with step h on every parameter of every tensor. Tensors
// the loss is invariant to (a shift shared by all scores) have gradients at
// round-off level, so the denominator never drops below floor.
inline std::vector<TensorCheck> check_gradient(const nn::ParamLayout& layout, const Eigen::VectorXd& params,
                                               const Eigen::VectorXd& analytic,
                                               const std::function<double(const Eigen::VectorXd&)>& f,
                                               double h = 1e-4, double floor = 1e-8) {
  std::vector<TensorCheck> out;
  Eigen::VectorXd p = params;
  for (const auto& t : layout.tensors()) {
    Eigen::VectorXd num(t.size());
    for (std::size_t k = 0; k < t.size(); ++k) {
      std::size_t i = t.offset + k;
      double keep = p[i];
      p[i] = keep + h;
      double up = f(p);
      p[i] = keep - h;
      double down = f(p);
      p[i] = keep;
      num[k] = (up - down) / (2 * h);
    }
    Eigen::VectorXd ana = analytic.segment(t.offset, t.size());
    double scale = std::max({ana.norm(), num.norm(), floor});
    double err = (ana - num).norm() / scale;
    out.push_back({t.name, err, scale});
  }
  return out;
}

inline double worst(const std::vector<TensorCheck>& checks) {
  double w = 0.0;
  for (const auto& c : checks) w = std::max(w, c.rel_error);
  return w;
}

}  // namespace sloscale::testing
