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

#include "sloscale/forecaster.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "sloscale/error.hpp"

namespace sloscale::forecast {

LoadHistory::LoadHistory(std::size_t window) : window_(window) {
  if (window_ < 4) throw Error(ErrorCode::kInvalidArgument, "LoadHistory: window must be >= 4");
}

void LoadHistory::push(std::int64_t tick, double arrivals_rps) {
  if (!values_.empty() && tick <= values_.back().tick) {
    throw Error(ErrorCode::kInvalidArgument, "LoadHistory: ticks must be strictly increasing");
  }
  if (!std::isfinite(arrivals_rps)) throw Error(ErrorCode::kInvalidArgument, "LoadHistory: non-finite arrivals");
  values_.push_back({tick, arrivals_rps});
  if (values_.size() > window_) values_.pop_front();
}

std::vector<double> LoadHistory::values() const {
  std::vector<double> out;
  out.reserve(values_.size());
  for (const auto& o : values_) out.push_back(o.arrivals_rps);
  return out;
}

ArModel fit(std::span<const double> series, int order) {
  if (order < 1) throw Error(ErrorCode::kInvalidArgument, "fit: order must be >= 1");
  const auto n = static_cast<int>(series.size());
  const int rows = n - order;
  const bool zeros = std::all_of(series.begin(), series.end(), [](double v) { return v == 0.0; });
  if (rows < order || zeros) return {{}, true};
  Eigen::MatrixXd x(rows, order);
  Eigen::VectorXd y(rows);
  for (int r = 0; r < rows; ++r) {
    const int t = r + order;
    y[r] = series[static_cast<std::size_t>(t)];
    for (int j = 0; j < order; ++j) x(r, j) = series[static_cast<std::size_t>(t - 1 - j)];
  }
  Eigen::VectorXd c = x.completeOrthogonalDecomposition().solve(y);
  if (!c.allFinite()) return {{}, true};
  return {std::vector<double>(c.data(), c.data() + c.size()), false};
}

ArModel fit(const LoadHistory& history, int order) {
  auto values = history.values();
  return fit(values, order);
}

double predict(const ArModel& model, std::span<const double> recent) {
  if (recent.empty()) throw Error(ErrorCode::kInvalidArgument, "predict: empty window");
  if (model.last_value) return std::max(0.0, recent.back());
  const auto p = model.coefficients.size();
  if (recent.size() < p) throw Error(ErrorCode::kInvalidArgument, "predict: window shorter than the model order");
  double y = 0.0;
  for (std::size_t j = 0; j < p; ++j) y += model.coefficients[j] * recent[recent.size() - 1 - j];
  return std::max(0.0, y);
}

Forecaster::Forecaster(std::size_t window, int order) : history_(window), order_(order) {
  if (order_ < 1) throw Error(ErrorCode::kInvalidArgument, "Forecaster: order must be >= 1");
}

double Forecaster::forecast() const {
  if (history_.size() == 0) return 0.0;
  auto values = history_.values();
  return predict(fit(values, order_), values);
}

}  // namespace sloscale::forecast
